//! General ultralocal characteristic functionals: single-field and
//! canonical-pair exponents with Gaussian terms and Levy-measure integrals,
//! admissibility and reducibility classification, Gaussian superposition over
//! the linear shift, and the sharp-time model-field kernel.
//!
//! Levy measures are represented as point masses plus a named density sampled
//! on a symmetric midpoint grid; finiteness of the defining integrals is
//! assessed by two-level grid refinement.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{FieldConfig, LatticeSpec};
use crate::C64;

/// Named even density forms, evaluable at any point so grids can refine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityForm {
    /// `amplitude * e^{-lambda^2}`
    Gaussian { amplitude: f64 },
    /// `amplitude * |lambda|^power * e^{-lambda^2}` (power may be negative)
    PowerGaussian { amplitude: f64, power: i32 },
    /// `amplitude` across the whole grid window
    Flat { amplitude: f64 },
}

impl DensityForm {
    pub fn eval(&self, l: f64) -> f64 {
        match *self {
            DensityForm::Gaussian { amplitude } => amplitude * (-l * l).exp(),
            DensityForm::PowerGaussian { amplitude, power } => {
                amplitude * l.abs().powi(power) * (-l * l).exp()
            }
            DensityForm::Flat { amplitude } => amplitude,
        }
    }
}

/// Symmetric midpoint grid: points `+-(j + 1/2) step` up to `half_range`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    pub step: f64,
    pub half_range: f64,
}

impl QuadratureGrid {
    pub fn new(step: f64, half_range: f64) -> Result<Self> {
        if step <= 0.0 || half_range <= step {
            return Err(Error::invalid(
                "quadrature grid needs 0 < step < half_range",
            ));
        }
        Ok(QuadratureGrid { step, half_range })
    }

    /// Default grid for the desk-scale functionals.
    pub fn standard() -> Self {
        QuadratureGrid {
            step: 0.01,
            half_range: 8.0,
        }
    }
}

/// Nonnegative measure: point masses plus an optional gridded density, with
/// an optional separable per-site scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    /// `(location, weight)` pairs, weights positive.
    pub point_masses: Vec<(f64, f64)>,
    pub density: Option<DensityForm>,
    pub grid: QuadratureGrid,
    /// Separable spatial scaling `s(x)`; `None` means homogeneous.
    pub site_scaling: Option<Vec<f64>>,
}

/// Outcome of a refinement-tested quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Finiteness {
    Finite(f64),
    Infinite,
}

impl Finiteness {
    pub fn is_finite(&self) -> bool {
        matches!(self, Finiteness::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Finiteness::Finite(v) => Some(v),
            Finiteness::Infinite => None,
        }
    }
}

const REFINE_RTOL: f64 = 1e-6;
const DIVERGENCE_GROWTH: f64 = 1.3;

impl LevyMeasure {
    pub fn zero() -> Self {
        LevyMeasure {
            point_masses: Vec::new(),
            density: None,
            grid: QuadratureGrid::standard(),
            site_scaling: None,
        }
    }

    pub fn from_density(form: DensityForm) -> Self {
        LevyMeasure {
            point_masses: Vec::new(),
            density: Some(form),
            grid: QuadratureGrid::standard(),
            site_scaling: None,
        }
    }

    pub fn from_points(points: Vec<(f64, f64)>) -> Self {
        LevyMeasure {
            point_masses: points,
            density: None,
            grid: QuadratureGrid::standard(),
            site_scaling: None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.point_masses.iter().all(|&(_, w)| w == 0.0) && self.density.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .point_masses
            .iter()
            .any(|&(_, w)| w <= 0.0 || !w.is_finite())
        {
            return Err(Error::invalid("point masses must have positive weights"));
        }
        if let Some(s) = &self.site_scaling {
            if s.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::invalid("site scaling must be nonnegative"));
            }
        }
        Ok(())
    }

    fn scaling(&self, site: usize) -> f64 {
        self.site_scaling.as_ref().map_or(1.0, |s| s[site])
    }

    /// Midpoint quadrature of `f` against the density at `2^refinement`
    /// times the base resolution, plus the point-mass sum.
    pub fn integrate(&self, f: impl Fn(f64) -> C64, refinement: u32) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &(l, w) in &self.point_masses {
            acc += f(l) * w;
        }
        if let Some(form) = self.density {
            let h = self.grid.step / (1 << refinement) as f64;
            let count = (self.grid.half_range / h).floor() as usize;
            let mut quad = C64::new(0.0, 0.0);
            for j in 0..count {
                let l = (j as f64 + 0.5) * h;
                quad += (f(l) * form.eval(l) + f(-l) * form.eval(-l)) * h;
            }
            acc += quad;
        }
        acc
    }

    /// Refinement-tested real integral against the measure.
    pub fn checked_integral(&self, f: impl Fn(f64) -> f64) -> Finiteness {
        let eval = |r: u32| self.integrate(|l| C64::new(f(l), 0.0), r).re;
        let coarse = eval(0);
        let mid = eval(1);
        let fine = eval(2);
        if (fine - mid).abs() <= REFINE_RTOL * fine.abs().max(1.0) {
            return Finiteness::Finite(fine);
        }
        if mid.abs() > DIVERGENCE_GROWTH * coarse.abs()
            && fine.abs() > DIVERGENCE_GROWTH * mid.abs()
        {
            return Finiteness::Infinite;
        }
        // still drifting but not geometrically: refine once more and decide
        let finer = eval(3);
        if (finer - fine).abs() <= REFINE_RTOL * finer.abs().max(1.0) {
            Finiteness::Finite(finer)
        } else {
            Finiteness::Infinite
        }
    }

    /// `int lambda^2/(1 + lambda^2) d(measure)`, the admissibility integral.
    pub fn admissibility_integral(&self) -> Finiteness {
        self.checked_integral(|l| l * l / (1.0 + l * l))
    }

    /// Total mass of the measure (may diverge while the measure stays
    /// admissible).
    pub fn total_mass(&self) -> Finiteness {
        self.checked_integral(|_| 1.0)
    }
}

/// Which functional family the parameters describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamsKind {
    SingleField,
    Canonical,
}

/// Data of a general ultralocal representation on a lattice.
#[derive(Debug, Clone)]
pub struct UltralocalParams {
    pub kind: ParamsKind,
    /// Linear shift of the field term, per site.
    pub a: Vec<f64>,
    /// Linear shift of the momentum term (canonical case), per site.
    pub b: Vec<f64>,
    /// Gaussian coefficient of the field term, nonnegative, per site.
    pub c: Vec<f64>,
    /// Gaussian coefficient of the momentum term (canonical), per site.
    pub d: Vec<f64>,
    pub sigma: LevyMeasure,
    pub rho: LevyMeasure,
}

fn splat(v: f64, sites: usize) -> Vec<f64> {
    vec![v; sites]
}

impl UltralocalParams {
    /// Homogeneous single-field parameters.
    pub fn single_field(a: f64, c: f64, sigma: LevyMeasure, sites: usize) -> Self {
        UltralocalParams {
            kind: ParamsKind::SingleField,
            a: splat(a, sites),
            b: splat(0.0, sites),
            c: splat(c, sites),
            d: splat(0.0, sites),
            sigma,
            rho: LevyMeasure::zero(),
        }
    }

    /// Homogeneous canonical-pair parameters.
    pub fn canonical(
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        sigma: LevyMeasure,
        rho: LevyMeasure,
        sites: usize,
    ) -> Self {
        UltralocalParams {
            kind: ParamsKind::Canonical,
            a: splat(a, sites),
            b: splat(b, sites),
            c: splat(c, sites),
            d: splat(d, sites),
            sigma,
            rho,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        let flat = |v: &[f64]| v.windows(2).all(|w| w[0] == w[1]);
        flat(&self.a)
            && flat(&self.b)
            && flat(&self.c)
            && flat(&self.d)
            && self.sigma.site_scaling.is_none()
            && self.rho.site_scaling.is_none()
    }

    fn check_sites(&self, sites: usize) -> Result<()> {
        for (name, v) in [
            ("a", &self.a),
            ("b", &self.b),
            ("c", &self.c),
            ("d", &self.d),
        ] {
            if v.len() != sites {
                return Err(Error::invalid(format!(
                    "parameter {name} has {} entries for {sites} sites",
                    v.len()
                )));
            }
        }
        for (name, m) in [("sigma", &self.sigma), ("rho", &self.rho)] {
            if let Some(s) = &m.site_scaling {
                if s.len() != sites {
                    return Err(Error::invalid(format!(
                        "{name} site scaling has {} entries for {sites} sites",
                        s.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Admissibility report for the measures and the Gaussian coefficients.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub sigma_integral: Finiteness,
    pub rho_integral: Finiteness,
    pub sigma_mass: Finiteness,
    pub rho_mass: Finiteness,
    pub c_min: f64,
    pub cd_min: f64,
    pub pass: bool,
}

/// Evaluate the admissibility integrals by refinement-tested quadrature and
/// check the Gaussian-coefficient conditions.
pub fn admissibility_check(params: &UltralocalParams) -> Result<AdmissibilityReport> {
    params.sigma.validate()?;
    params.rho.validate()?;
    let sigma_integral = params.sigma.admissibility_integral();
    let rho_integral = params.rho.admissibility_integral();
    let sigma_mass = params.sigma.total_mass();
    let rho_mass = params.rho.total_mass();
    let c_min = params.c.iter().copied().fold(f64::INFINITY, f64::min);
    let cd_min = params
        .c
        .iter()
        .zip(&params.d)
        .map(|(&c, &d)| c * d)
        .fold(f64::INFINITY, f64::min);
    let coeff_ok = match params.kind {
        ParamsKind::SingleField => c_min >= 0.0,
        ParamsKind::Canonical => c_min >= 0.0 && cd_min >= 1.0 - 1e-12,
    };
    let pass = sigma_integral.is_finite() && rho_integral.is_finite() && coeff_ok;
    Ok(AdmissibilityReport {
        sigma_integral,
        rho_integral,
        sigma_mass,
        rho_mass,
        c_min,
        cd_min,
        pass,
    })
}

/// Reducibility classification with the clauses that fired.
#[derive(Debug, Clone)]
pub struct Classification {
    pub reducible: bool,
    pub reasons: Vec<String>,
}

/// A representation is reducible when either measure is nonzero or when
/// `c d > 1` on a nonzero fraction of sites.
pub fn classify_representation(params: &UltralocalParams) -> Classification {
    let mut reasons = Vec::new();
    if !params.sigma.is_zero() {
        reasons.push("sigma is nonzero".to_string());
    }
    if !params.rho.is_zero() {
        reasons.push("rho is nonzero".to_string());
    }
    if params.kind == ParamsKind::Canonical {
        let over = params
            .c
            .iter()
            .zip(&params.d)
            .filter(|&(&c, &d)| c * d > 1.0 + 1e-12)
            .count();
        if over > 0 {
            reasons.push(format!("c d > 1 on {over} site(s)"));
        }
    }
    Classification {
        reducible: !reasons.is_empty(),
        reasons,
    }
}

/// Compensated Levy exponent term for the field sector:
/// `int [e^{i lambda u} - 1 - i lambda u / (1 + lambda^2)] d sigma`.
fn levy_exponent_pi(measure: &LevyMeasure, u: f64) -> C64 {
    measure.integrate(
        |l| C64::new(0.0, l * u).exp() - C64::new(1.0, l * u / (1.0 + l * l)),
        0,
    )
}

/// Momentum-sector variant with the opposite sign conventions:
/// `int [e^{-i gamma u} - 1 + i gamma u / (1 + gamma^2)] d rho`.
fn levy_exponent_phi(measure: &LevyMeasure, u: f64) -> C64 {
    measure.integrate(
        |g| C64::new(0.0, -g * u).exp() - C64::new(1.0, -g * u / (1.0 + g * g)),
        0,
    )
}

/// Single-field characteristic functional
/// `exp( sum_x dx^d { i a pi - c pi^2 / 4 + levy(pi) } )`.
pub fn char_functional_field(
    pi: &[f64],
    params: &UltralocalParams,
    spec: &LatticeSpec,
) -> Result<C64> {
    let sites = spec.sites();
    params.check_sites(sites)?;
    if pi.len() != sites {
        return Err(Error::invalid("pi does not match the lattice"));
    }
    let report = admissibility_check(params)?;
    if !report.sigma_integral.is_finite() {
        return Err(Error::invalid(
            "sigma is inadmissible: the integral of lambda^2/(1+lambda^2) diverges",
        ));
    }
    if report.c_min < 0.0 {
        return Err(Error::invalid("c must be nonnegative"));
    }
    let w = spec.weight();
    let mut exponent = C64::new(0.0, 0.0);
    for (x, &u) in pi.iter().enumerate() {
        exponent += C64::new(-0.25 * params.c[x] * u * u, params.a[x] * u) * w;
        exponent += levy_exponent_pi(&params.sigma, u) * (w * params.sigma.scaling(x));
    }
    Ok(exponent.exp())
}

/// Canonical-pair characteristic functional with both Gaussian terms and
/// both Levy integrals.
pub fn char_functional_canonical(
    pi: &[f64],
    phi: &[f64],
    params: &UltralocalParams,
    spec: &LatticeSpec,
) -> Result<C64> {
    let sites = spec.sites();
    params.check_sites(sites)?;
    if pi.len() != sites || phi.len() != sites {
        return Err(Error::invalid("fields do not match the lattice"));
    }
    let report = admissibility_check(params)?;
    if !report.sigma_integral.is_finite() || !report.rho_integral.is_finite() {
        return Err(Error::invalid(
            "inadmissible measure: a defining integral diverges",
        ));
    }
    if report.cd_min < 1.0 - 1e-12 {
        return Err(Error::invalid(format!(
            "canonical representation requires c d >= 1 at every site (min {})",
            report.cd_min
        )));
    }
    let w = spec.weight();
    let mut exponent = C64::new(0.0, 0.0);
    for x in 0..sites {
        let (u, v) = (pi[x], phi[x]);
        exponent += C64::new(
            -0.25 * (params.c[x] * u * u + params.d[x] * v * v),
            params.a[x] * u - params.b[x] * v,
        ) * w;
        exponent += levy_exponent_pi(&params.sigma, u) * (w * params.sigma.scaling(x));
        exponent += levy_exponent_phi(&params.rho, v) * (w * params.rho.scaling(x));
    }
    Ok(exponent.exp())
}

/// Result of the Gaussian superposition over the linear shift.
#[derive(Debug, Clone)]
pub struct SuperposeResult {
    /// Closed-form superposed overlap.
    pub value: C64,
    /// Derived canonical coefficients `c = 1/M`, `d = M + M~`.
    pub derived_c: f64,
    pub derived_d: f64,
    /// Monte Carlo estimate and its standard error, when requested.
    pub mc_estimate: Option<(C64, f64)>,
}

/// Superpose the shifted ultralocal overlaps over a centered Gaussian
/// distribution of the shift `a(x)`, which widens the field Gaussian from
/// `M` to `M + M~`:
/// `int e^{i int a (phi2 - phi1)} d mu(a) = e^{-(M~/4) int (phi2 - phi1)^2}`.
pub fn gaussian_superpose(
    m_width: f64,
    m_tilde: f64,
    f2: &FieldConfig,
    f1: &FieldConfig,
    spec: &LatticeSpec,
    mc_samples: Option<(usize, u64)>,
) -> Result<SuperposeResult> {
    if m_width <= 0.0 || m_tilde <= 0.0 {
        return Err(Error::invalid(
            "gaussian_superpose requires M > 0 and M~ > 0",
        ));
    }
    let base = crate::free_field::ultralocal_overlap(f2, f1, m_width, spec)?;
    let w = spec.weight();
    let phi_sq: f64 = f2
        .phi
        .iter()
        .zip(&f1.phi)
        .map(|(&p2, &p1)| w * (p2 - p1) * (p2 - p1))
        .sum();
    let value = base * (-0.25 * m_tilde * phi_sq).exp();
    let mc_estimate = match mc_samples {
        None => None,
        Some((samples, seed)) => {
            use rand::SeedableRng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // per-site shift variance M~/(2 dx^d) reproduces the target
            // Gaussian once summed with weight dx^d
            let sd = (m_tilde / (2.0 * w)).sqrt();
            let sites = spec.sites();
            let mut acc = C64::new(0.0, 0.0);
            let mut acc_re_sq = 0.0;
            for _ in 0..samples {
                let mut phase = 0.0;
                for x in 0..sites {
                    let a: f64 = sample_standard_normal(&mut rng) * sd;
                    phase += w * a * (f2.phi[x] - f1.phi[x]);
                }
                let z = C64::new(0.0, phase).exp();
                acc += z;
                acc_re_sq += z.re * z.re;
            }
            let mean = acc / samples as f64;
            // standard error of the real part, which carries the estimate
            let var = (acc_re_sq / samples as f64 - mean.re * mean.re).max(0.0);
            let std_err = (var / samples as f64).sqrt();
            Some((mean, std_err))
        }
    };
    Ok(SuperposeResult {
        value,
        derived_c: 1.0 / m_width,
        derived_d: m_width + m_tilde,
        mc_estimate,
    })
}

/// Box-Muller standard normal from a seeded uniform stream.
fn sample_standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Sharp-time model-field data: overall coefficient `b` and the even model
/// function `c(lambda)^2` as a measure.
#[derive(Debug, Clone)]
pub struct ModelFieldSpec {
    pub b_coef: f64,
    pub c_squared: LevyMeasure,
}

impl ModelFieldSpec {
    pub fn validate(&self) -> Result<()> {
        if self.b_coef <= 0.0 {
            return Err(Error::invalid("model coefficient b must be positive"));
        }
        self.c_squared.validate()?;
        // evenness: point masses must pair up (or sit at the origin)
        for &(l, w) in &self.c_squared.point_masses {
            if l != 0.0 {
                let mirrored = self
                    .c_squared
                    .point_masses
                    .iter()
                    .any(|&(l2, w2)| l2 == -l && (w2 - w).abs() <= 1e-15 * w.abs());
                if !mirrored {
                    return Err(Error::invalid(
                        "model function must be even: point masses must pair across 0",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Exponent `sum_x dx^d int [1 - cos(lambda u_x)] c(lambda)^2 d lambda` at
/// unit `b`, refinement-checked.
pub fn model_field_exponent(
    pi2: &[f64],
    pi1: &[f64],
    spec: &LatticeSpec,
    model: &ModelFieldSpec,
) -> Result<f64> {
    model.validate()?;
    if pi2.len() != spec.sites() || pi1.len() != spec.sites() {
        return Err(Error::invalid("fields do not match the lattice"));
    }
    let w = spec.weight();
    let mut total = 0.0;
    for x in 0..spec.sites() {
        let u = pi2[x] - pi1[x];
        if u == 0.0 {
            continue;
        }
        let site = model.c_squared.checked_integral(|l| 1.0 - (l * u).cos());
        match site {
            Finiteness::Finite(v) => total += w * v,
            Finiteness::Infinite => {
                return Err(Error::invalid(
                    "model-function integral diverges for this argument",
                ))
            }
        }
    }
    Ok(total)
}

/// Sharp-time kernel `exp(-b * exponent)`, a real value in (0, 1].
pub fn model_field_kernel(
    pi2: &[f64],
    pi1: &[f64],
    spec: &LatticeSpec,
    model: &ModelFieldSpec,
) -> Result<f64> {
    let exponent = model_field_exponent(pi2, pi1, spec, model)?;
    Ok((-model.b_coef * exponent).exp())
}
