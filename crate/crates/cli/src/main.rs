fn main() {
    std::process::exit(sle_densities_cli::run(std::env::args_os()));
}
