//! Periodic box lattices, field configurations, and real momentum modes.
//!
//! Fields live on `n^d` sites of a box of side `l_box` (d = 1 or 3). The
//! orthonormal mode set pairs `+k/-k` plane waves into real cos/sin
//! oscillators; modes are ordered by increasing `|k|` with lexicographic
//! tie-break, cos before sin, so every per-mode computation is deterministic.
//! All quadratic forms carry the lattice weight `dx^d`.

use crate::error::{Error, Result};

/// Spatial lattice and momentum-mode bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    /// Spatial dimension, 1 or 3.
    pub d: usize,
    /// Sites per dimension (even).
    pub n: usize,
    /// Box side length.
    pub l_box: f64,
}

/// cos or sin member of a `+k/-k` pair; self-paired wave vectors only carry
/// the cos member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Cos,
    Sin,
}

/// One real oscillator mode of the box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// Integer wave vector in units of `2 pi / l_box` (min-image values).
    pub m: [i64; 3],
    pub kind: ModeKind,
    /// `|k|^2` in physical units.
    pub k2: f64,
}

impl Mode {
    /// Dispersion `omega = sqrt(k^2 + mass^2)`.
    pub fn omega(&self, mass: f64) -> f64 {
        (self.k2 + mass * mass).sqrt()
    }
}

/// Real fields `(pi, phi)` on the lattice sites, flattened in row-major
/// site order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub pi: Vec<f64>,
    pub phi: Vec<f64>,
}

impl FieldConfig {
    pub fn zeros(spec: &LatticeSpec) -> Self {
        let sites = spec.sites();
        FieldConfig {
            pi: vec![0.0; sites],
            phi: vec![0.0; sites],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pi.iter().chain(&self.phi).all(|v| v.is_finite())
    }
}

impl LatticeSpec {
    pub fn new(d: usize, n: usize, l_box: f64) -> Result<Self> {
        if d != 1 && d != 3 {
            return Err(Error::invalid("lattice dimension must be 1 or 3"));
        }
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::invalid("sites per dimension must be even"));
        }
        if d == 3 && n > 4 {
            return Err(Error::invalid(
                "d = 3 is supported only at n <= 4 sites per dimension",
            ));
        }
        if l_box <= 0.0 {
            return Err(Error::invalid("box length must be positive"));
        }
        Ok(LatticeSpec { d, n, l_box })
    }

    pub fn sites(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn dx(&self) -> f64 {
        self.l_box / self.n as f64
    }

    /// Integration weight per site, `dx^d`.
    pub fn weight(&self) -> f64 {
        self.dx().powi(self.d as i32)
    }

    pub fn volume(&self) -> f64 {
        self.l_box.powi(self.d as i32)
    }

    /// Integer coordinates of a flattened site index.
    fn site_coords(&self, idx: usize) -> [usize; 3] {
        match self.d {
            1 => [idx, 0, 0],
            _ => [
                idx % self.n,
                (idx / self.n) % self.n,
                idx / (self.n * self.n),
            ],
        }
    }

    /// Deterministic mode enumeration: increasing `|k|`, lexicographic
    /// tie-break on the integer wave vector, cos before sin.
    pub fn mode_order(&self) -> Vec<Mode> {
        let half = (self.n / 2) as i64;
        let range: Vec<i64> = (-half + 1..=half).collect();
        let unit = 2.0 * std::f64::consts::PI / self.l_box;
        let mut modes = Vec::with_capacity(self.sites());
        let mut push_vec = |m: [i64; 3]| {
            // canonical representative of the +-k pair: self-paired vectors
            // (all components 0 or n/2) carry cos only; otherwise the member
            // whose first nonzero component is positive carries cos and sin
            let self_paired = m.iter().all(|&c| c == 0 || c == half);
            let k2 = m.iter().map(|&c| (c as f64 * unit).powi(2)).sum::<f64>();
            if self_paired {
                modes.push(Mode {
                    m,
                    kind: ModeKind::Cos,
                    k2,
                });
            } else {
                let first = m.iter().find(|&&c| c != 0 && c != half);
                if let Some(&c) = first {
                    if c > 0 {
                        modes.push(Mode {
                            m,
                            kind: ModeKind::Cos,
                            k2,
                        });
                        modes.push(Mode {
                            m,
                            kind: ModeKind::Sin,
                            k2,
                        });
                    }
                }
            }
        };
        match self.d {
            1 => {
                for &mx in &range {
                    push_vec([mx, 0, 0]);
                }
            }
            _ => {
                for &mz in &range {
                    for &my in &range {
                        for &mx in &range {
                            push_vec([mx, my, mz]);
                        }
                    }
                }
            }
        }
        modes.sort_by(|a, b| {
            a.k2.total_cmp(&b.k2)
                .then_with(|| a.m.cmp(&b.m))
                .then_with(|| {
                    let rank = |k: ModeKind| if k == ModeKind::Cos { 0 } else { 1 };
                    rank(a.kind).cmp(&rank(b.kind))
                })
        });
        debug_assert_eq!(modes.len(), self.sites());
        modes
    }

    /// Orthonormal mode function evaluated at a site.
    pub fn mode_function(&self, mode: &Mode, site: usize) -> f64 {
        let coords = self.site_coords(site);
        let half = (self.n / 2) as i64;
        let mut phase = 0.0;
        for (m, c) in mode.m.iter().zip(coords).take(self.d) {
            phase += *m as f64 * c as f64;
        }
        phase *= 2.0 * std::f64::consts::PI / self.n as f64;
        let vol = self.volume();
        let self_paired = mode.m.iter().all(|&c| c == 0 || c == half);
        match mode.kind {
            ModeKind::Cos if self_paired => phase.cos() / vol.sqrt(),
            ModeKind::Cos => (2.0 / vol).sqrt() * phase.cos(),
            ModeKind::Sin => (2.0 / vol).sqrt() * phase.sin(),
        }
    }

    /// Mode coefficients of a site function: `c_m = sum_x dx^d f(x) h_m(x)`.
    pub fn decompose(&self, values: &[f64], modes: &[Mode]) -> Vec<f64> {
        let w = self.weight();
        modes
            .iter()
            .map(|mode| {
                (0..self.sites())
                    .map(|site| w * values[site] * self.mode_function(mode, site))
                    .sum()
            })
            .collect()
    }

    /// Rebuild site values from mode coefficients.
    pub fn reconstruct(&self, coeffs: &[f64], modes: &[Mode]) -> Vec<f64> {
        let mut out = vec![0.0; self.sites()];
        for (c, mode) in coeffs.iter().zip(modes) {
            for (site, slot) in out.iter_mut().enumerate() {
                *slot += c * self.mode_function(mode, site);
            }
        }
        out
    }
}
