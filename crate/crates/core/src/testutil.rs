//! Test-only oracles: quadratures and closed-form expansions kept independent
//! of the implementation paths they check.

use crate::C64;

/// Trapezoid quadrature of `f` on `[a, b]` with `n` intervals.
pub fn trapezoid(f: impl Fn(f64) -> C64, a: f64, b: f64, n: usize) -> C64 {
    let h = (b - a) / n as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for k in 1..n {
        acc += f(a + h * k as f64);
    }
    acc * h
}

/// Position-space wavefunction of the coherent state
/// `|p,q> = e^{-iqP} e^{ipQ} |eta>` for a fiducial of width `omega`:
/// `psi(x) = (omega/pi)^{1/4} e^{ip(x-q)} e^{-omega (x-q)^2 / 2}`.
fn wavepacket(omega: f64, p: f64, q: f64, x: f64) -> C64 {
    let amp = (omega / std::f64::consts::PI).powf(0.25);
    let gauss = (-0.5 * omega * (x - q) * (x - q)).exp();
    amp * gauss * C64::new(0.0, p * (x - q)).exp()
}

/// Quadrature oracle for the coherent-state overlap `<p2,q2|p1,q1>`.
pub fn wavepacket_overlap(omega: f64, two: (f64, f64), one: (f64, f64)) -> C64 {
    let span = 12.0 / omega.sqrt().min(1.0) + two.1.abs() + one.1.abs();
    trapezoid(
        |x| wavepacket(omega, two.0, two.1, x).conj() * wavepacket(omega, one.0, one.1, x),
        -span,
        span,
        40_000,
    )
}

/// Quadrature oracle for the overlap of two oscillator ground states of
/// widths `m` and `w`: closed form `(2 sqrt(m w) / (m + w))^{1/2}`.
pub fn gaussian_vacuum_overlap_quadrature(m: f64, w: f64) -> f64 {
    let amp = (m * w / (std::f64::consts::PI * std::f64::consts::PI)).powf(0.25);
    let span = 12.0 / m.min(w).sqrt();
    trapezoid(
        |x| C64::new(amp * (-0.5 * (m + w) * x * x).exp(), 0.0),
        -span,
        span,
        40_000,
    )
    .re
}

/// Expansion of the width-`w` ground state in the width-`m` number basis
/// (Bogoliubov squeezed vacuum): even components
/// `c_{2n} = sech(r)^{1/2} (-tanh r)^n sqrt((2n)!)/(2^n n!)`,
/// `tanh r = (w - m)/(w + m)`.
pub fn squeezed_vacuum_coeffs(d: usize, m: f64, w: f64) -> Vec<f64> {
    let tanh_r = (w - m) / (w + m);
    let cosh_r = (w + m) / (2.0 * (w * m).sqrt());
    let mut coeffs = vec![0.0; d];
    let mut c = (1.0 / cosh_r).sqrt();
    let mut n = 0usize;
    while 2 * n < d {
        coeffs[2 * n] = c;
        let k = (2 * n) as f64;
        c *= -tanh_r * ((k + 1.0) * (k + 2.0)).sqrt() / (k + 2.0);
        n += 1;
    }
    coeffs
}

/// Coherent-state expansion in the number basis of its own frequency:
/// `c_n = e^{-|z|^2/2} z^n / sqrt(n!)`.
pub fn coherent_expansion(d: usize, z: C64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); d];
    let mut c = C64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
    for (n, slot) in out.iter_mut().enumerate() {
        *slot = c;
        c = c * z / ((n + 1) as f64).sqrt();
    }
    out
}

/// Single-mode propagator oracle: `<z2| e^{-i dt w a*a} |z1>` summed over the
/// number-basis expansion, independent of any closed-form kernel.
pub fn single_mode_propagator_oracle(omega: f64, z2: C64, z1: C64, dt: f64, d: usize) -> C64 {
    let c2 = coherent_expansion(d, z2);
    let c1 = coherent_expansion(d, z1);
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..d {
        let phase = C64::new(0.0, -omega * dt * n as f64).exp();
        acc += c2[n].conj() * phase * c1[n];
    }
    acc
}

/// Mode label `z = (sqrt(w) q + i p / sqrt(w)) / sqrt(2)`.
pub fn mode_label(p: f64, q: f64, w: f64) -> C64 {
    C64::new(w.sqrt() * q, p / w.sqrt()) / 2.0_f64.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_gaussian_mass() {
        let v = trapezoid(|x| C64::new((-x * x).exp(), 0.0), -10.0, 10.0, 20_000);
        assert!((v.re - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn coherent_expansion_normalized() {
        let c = coherent_expansion(80, C64::new(1.2, -0.7));
        let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn squeezed_vacuum_normalized() {
        let c = squeezed_vacuum_coeffs(120, 1.0, 4.0);
        let norm: f64 = c.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-10);
    }
}
