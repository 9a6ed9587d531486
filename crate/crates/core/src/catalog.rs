//! Fixed catalog of initial potentials, metric expressions and seeded random
//! data used by scenarios and tests. Every random object takes an explicit
//! seed and draws from ChaCha8, so reruns reproduce bit-exactly.

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::{BoundaryMode, Grid};
use crate::metric::MetricField;
use crate::smat::{SMat, MAX_DIM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Initial-potential expressions.
#[derive(Debug, Clone)]
pub enum PotentialExpr {
    Flat,
    /// `φ = b + xᵀ A x` with symmetric `A`.
    Quadratic {
        a: SMat,
        b: f64,
    },
    /// Smooth radial bump `φ = a s² e^{−s}` with `s = |x|²/w²`; quartic in
    /// `|x|` near the origin and decaying fast enough that the tails are
    /// negligible at the box faces for `w ≲ r/6`.
    QuarticBump {
        a: f64,
        w: f64,
    },
    /// `φ = amp Π_j cos(π k x^j / r)`, 2r-periodic for integer `k`.
    Sine {
        k: u32,
        amp: f64,
    },
}

impl PotentialExpr {
    pub fn eval(&self, x: &[f64; MAX_DIM], n: usize, r: f64) -> f64 {
        match self {
            PotentialExpr::Flat => 0.0,
            PotentialExpr::Quadratic { a, b } => {
                let mut s = *b;
                for i in 0..n {
                    for j in 0..n {
                        s += a.a[i][j] * x[i] * x[j];
                    }
                }
                s
            }
            PotentialExpr::QuarticBump { a, w } => {
                let mut s = 0.0;
                for i in 0..n {
                    s += x[i] * x[i];
                }
                s /= w * w;
                a * s * s * (-s).exp()
            }
            PotentialExpr::Sine { k, amp } => {
                let mut p = *amp;
                for i in 0..n {
                    p *= (PI * *k as f64 * x[i] / r).cos();
                }
                p
            }
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<ScalarField> {
        if let PotentialExpr::Quadratic { a, .. } = self {
            let mut asym: f64 = 0.0;
            for i in 0..grid.n {
                for j in 0..grid.n {
                    asym = asym.max((a.a[i][j] - a.a[j][i]).abs());
                }
            }
            if asym > 0.0 {
                return Err(CoreError::NotSymmetric(asym));
            }
        }
        let f = |x: &[f64; MAX_DIM]| self.eval(x, grid.n, grid.r);
        if grid.bc == BoundaryMode::Periodic {
            ScalarField::check_periodic_seam(grid, &f, 1e-9)?;
        }
        Ok(ScalarField::from_fn(grid, f))
    }
}

/// Metric expressions.
#[derive(Debug, Clone)]
pub enum MetricExpr {
    Constant(SMat),
    /// Metric of the potential `2|x|² + eps Σ x_i⁴`, i.e.
    /// `g_ij = δ_ij (1 + 3 eps x_i²)`: diagonal, x-dependent, and closed as a
    /// form since it derives from a potential.
    KahlerQuartic {
        eps: f64,
    },
}

impl MetricExpr {
    pub fn build(&self, grid: &Grid) -> Result<MetricField> {
        let m = match self {
            MetricExpr::Constant(g) => MetricField::constant(*g),
            MetricExpr::KahlerQuartic { eps } => MetricField::varying(
                (0..grid.num_nodes())
                    .map(|idx| {
                        let x = grid.coords(idx);
                        let mut g = SMat::zeros(grid.n);
                        for i in 0..grid.n {
                            g.a[i][i] = 1.0 + 3.0 * eps * x[i] * x[i];
                        }
                        g
                    })
                    .collect(),
            ),
        };
        m.validate(grid)?;
        Ok(m)
    }
}

/// Seeded random symmetric matrix with entries in `[-amp, amp]`.
pub fn random_symmetric(n: usize, amp: f64, seed: u64) -> SMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = SMat::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set_sym(i, j, rng.gen_range(-amp..amp));
        }
    }
    m
}

/// Seeded random SPD matrix: `I + small symmetric` kept diagonally dominant.
pub fn random_spd(n: usize, seed: u64) -> SMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = SMat::identity(n);
    for i in 0..n {
        m.a[i][i] = rng.gen_range(0.6..2.0);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let cap = 0.3 * (m.a[i][i] * m.a[j][j]).sqrt();
            m.set_sym(i, j, rng.gen_range(-cap..cap));
        }
    }
    m
}

/// Seeded smooth potential: a low-order trigonometric polynomial plus a
/// quadratic part, amplitude-capped so the eigenvalues stay moderate.
pub fn seeded_trig_potential(grid: &Grid, amp: f64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n;
    let r = grid.r;
    let modes: Vec<(f64, [i32; MAX_DIM], [f64; MAX_DIM])> = (0..4)
        .map(|_| {
            let c = rng.gen_range(-amp..amp);
            let mut k = [0i32; MAX_DIM];
            let mut ph = [0.0; MAX_DIM];
            for a in 0..n {
                k[a] = rng.gen_range(1..=3);
                ph[a] = rng.gen_range(0.0..2.0 * PI);
            }
            (c, k, ph)
        })
        .collect();
    let quad = random_symmetric(n, 0.3 * amp, seed.wrapping_add(1));
    ScalarField::from_fn(grid, move |x| {
        let mut v = 0.0;
        for (c, k, ph) in &modes {
            let mut m = *c;
            for a in 0..n {
                m *= (PI * k[a] as f64 * x[a] / r + ph[a]).cos();
            }
            v += m;
        }
        for i in 0..n {
            for j in 0..n {
                v += quad.a[i][j] * x[i] * x[j];
            }
        }
        v
    })
}

/// Seeded random section with smooth trigonometric complex components.
pub fn seeded_trig_section(grid: &Grid, amp: f64, seed: u64) -> crate::field::SectionField {
    use num_complex::Complex64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n;
    let r = grid.r;
    let mut section = crate::field::SectionField::zeros(grid);
    for part in 0..2 {
        for comp in 0..n {
            let re_c = rng.gen_range(-amp..amp);
            let im_c = rng.gen_range(-amp..amp);
            let k: i32 = rng.gen_range(1..=2);
            let ph: f64 = rng.gen_range(0.0..2.0 * PI);
            for idx in 0..grid.num_nodes() {
                let x = grid.coords(idx);
                let mut m = 1.0;
                for a in 0..n {
                    m *= (PI * k as f64 * x[a] / r + ph).cos();
                }
                let v = Complex64::new(re_c * m, im_c * m);
                if part == 0 {
                    section.vec_part[idx][comp] = v;
                } else {
                    section.form_part[idx][comp] = v;
                }
            }
        }
    }
    section
}
