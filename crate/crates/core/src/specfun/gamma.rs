use super::{nonpositive_integer, C};
use crate::error::{Error, Result};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// sin(πz) with the real part reduced first, so zeros at integers are exact.
pub fn sinpi(z: C) -> C {
    let n = z.re.round();
    let w = C::new(z.re - n, z.im) * PI;
    let s = w.sin();
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// cos(πz) with argument reduction.
pub fn cospi(z: C) -> C {
    let n = z.re.round();
    let w = C::new(z.re - n, z.im) * PI;
    let c = w.cos();
    if (n as i64) % 2 == 0 {
        c
    } else {
        -c
    }
}

fn lanczos_log_gamma(z: C) -> C {
    // Valid for Re z >= 1/2.
    let x = z - 1.0;
    let mut a = C::new(LANCZOS[0], 0.0);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        a += p / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + a.ln()
}

/// Principal-branch ln Γ(z). Errors at the poles z = 0, −1, −2, …
pub fn log_gamma(z: C) -> Result<C> {
    if let Some(n) = nonpositive_integer(z, 0.0) {
        return Err(Error::Pole(format!("log_gamma at {n}")));
    }
    if z.re >= 0.5 {
        Ok(lanczos_log_gamma(z))
    } else {
        // Γ(z)Γ(1−z) = π / sin(πz)
        Ok(C::new(PI.ln(), 0.0) - sinpi(z).ln() - lanczos_log_gamma(1.0 - z))
    }
}

/// Γ(z); errors at poles.
pub fn gamma(z: C) -> Result<C> {
    if z.re >= 0.5 {
        Ok(lanczos_log_gamma(z).exp())
    } else {
        let r = recip_gamma(z);
        if r == C::new(0.0, 0.0) {
            return Err(Error::Pole(format!("gamma at {}", z.re)));
        }
        Ok(1.0 / r)
    }
}

/// 1/Γ(z), entire; exactly zero at non-positive integers.
pub fn recip_gamma(z: C) -> C {
    if nonpositive_integer(z, 0.0).is_some() {
        return C::new(0.0, 0.0);
    }
    if z.re >= 0.5 {
        (-lanczos_log_gamma(z)).exp()
    } else {
        // 1/Γ(z) = sin(πz) Γ(1−z) / π keeps full relative accuracy near poles.
        sinpi(z) * lanczos_log_gamma(1.0 - z).exp() / PI
    }
}

/// Digamma ψ(z) = Γ'(z)/Γ(z).
pub fn digamma(z: C) -> Result<C> {
    if let Some(n) = nonpositive_integer(z, 0.0) {
        return Err(Error::Pole(format!("digamma at {n}")));
    }
    if z.re < 0.5 {
        // ψ(z) = ψ(1−z) − π cot(πz)
        let cot = cospi(z) / sinpi(z);
        return Ok(digamma(1.0 - z)? - PI * cot);
    }
    let mut acc = C::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 12.0 {
        acc -= 1.0 / w;
        w += 1.0;
    }
    const B: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let inv2 = 1.0 / (w * w);
    let mut p = inv2;
    let mut tail = C::new(0.0, 0.0);
    for b in B {
        tail += b * p;
        p *= inv2;
    }
    Ok(acc + w.ln() - 0.5 / w - tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn log_gamma_examples() {
        assert!(log_gamma(c(1.0)).unwrap().norm() < 1e-15);
        let half = log_gamma(c(0.5)).unwrap();
        assert!((half.re - 0.572_364_942_924_700_1).abs() < 1e-14);
        assert!((log_gamma(c(5.0)).unwrap().re - 24f64.ln()).abs() < 1e-13);
        assert!(matches!(log_gamma(c(-3.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn recip_gamma_examples() {
        assert_eq!(recip_gamma(c(0.0)), c(0.0));
        assert_eq!(recip_gamma(c(-1.0)), c(0.0));
        assert!((recip_gamma(c(2.0)) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn complex_values_against_reference() {
        // Reference values from a 30-digit evaluation.
        let g = gamma(C::new(0.3, 0.2)).unwrap();
        assert!((g - C::new(1.980_358_172_823_442_5, -1.414_576_008_373_303_3)).norm() < 1e-13 * g.norm());
        let g = gamma(C::new(-2.7, 1.1)).unwrap();
        let r = C::new(-0.044_545_929_693_393_15, -0.035_800_793_669_136_18);
        assert!((g - r).norm() < 1e-12 * r.norm());
        let d = digamma(C::new(0.3, 0.2)).unwrap();
        let r = C::new(-2.453_365_467_675_574, 1.762_178_090_380_654_6);
        assert!((d - r).norm() < 1e-13 * r.norm());
    }

    #[test]
    fn digamma_at_one() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(c(1.0)).unwrap() + euler).norm() < 1e-15);
        assert!((digamma(c(-0.5)).unwrap().re - 0.036_489_973_978_576_52).abs() < 1e-14);
    }
}
