//! Chart atlases. Every chart has the form p(u) = base(u) + s(u)·dir(u) with
//! s(u) fixed by ρ(p(u)) = 0, so node positions come from a 1-D root solve and
//! tangent vectors from implicit differentiation of that constraint.

use crate::cpoint::{c, CPoint2, C64, I};
use crate::error::{LabError, Result};
use crate::geometry::{worm_sampled_half_width, DomainKind, DomainSpec};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Bumped whenever a chart formula or the resolution-to-count map changes;
/// part of the mesh cache key.
pub const ATLAS_VERSION: u32 = 1;

/// Parametrization of the Hopf latitude φ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PhiMap {
    /// u = φ
    Linear,
    /// u = cos²φ
    CosSquared,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ChartKind {
    /// p = s·(cos φ e^{ia}, sin φ e^{iθ}) with parameters (φ-map, ξ, θ).
    /// ξ ∈ (0, 4) runs over the four quadrants of a; within each quadrant the
    /// map clusters nodes towards a = π/2, 3π/2 with exponent `gamma`.
    HopfRay { phi_map: PhiMap, gamma: f64 },
    /// z₁ = e^{t/2} e^{iα}, z₂ = i e^{it}(1 − s e^{iψ}); parameters (t, α, ψ).
    WormTube,
    /// (x₁ + i y₁, x₂ + i s); parameters (x₁, y₁, x₂).
    Graph,
    /// Local patch center + Σ uₖ·axesₖ + s·normal, s ∈ (−reach, reach).
    Local {
        center: CPoint2,
        axes: [CPoint2; 3],
        normal: CPoint2,
        reach: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct Chart {
    pub name: String,
    pub kind: ChartKind,
    pub bounds: [(f64, f64); 3],
    pub periodic: [bool; 3],
    /// Node position within a cell for periodic axes (0 = cell edge).
    pub periodic_offset: [f64; 3],
    pub counts: [usize; 3],
    /// Reverse the first parameter axis (orientation-reversing).
    pub flipped: bool,
}

/// base, ∂base/∂uᵢ, dir, ∂dir/∂uᵢ at one parameter point.
#[derive(Clone, Copy, Debug)]
pub struct ChartPoint {
    pub base: CPoint2,
    pub dbase: [CPoint2; 3],
    pub dir: CPoint2,
    pub ddir: [CPoint2; 3],
}

fn cis(a: f64) -> C64 {
    C64::from_polar(1.0, a)
}

/// Quadrant-clustered angle map ξ ∈ [0, 4] → a ∈ [0, 2π] and its derivative.
pub fn graded_angle(xi: f64, gamma: f64) -> (f64, f64) {
    let k = (xi.floor() as i64).clamp(0, 3);
    let tau = xi - k as f64;
    let kf = k as f64;
    if k % 2 == 0 {
        let r = 1.0 - tau;
        (
            (kf + 1.0) * FRAC_PI_2 - FRAC_PI_2 * r.powf(gamma),
            FRAC_PI_2 * gamma * r.powf(gamma - 1.0),
        )
    } else {
        (
            kf * FRAC_PI_2 + FRAC_PI_2 * tau.powf(gamma),
            FRAC_PI_2 * gamma * tau.powf(gamma - 1.0),
        )
    }
}

impl Chart {
    pub fn node_count(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn eval(&self, u: [f64; 3]) -> ChartPoint {
        let mut u = u;
        if self.flipped {
            u[0] = self.bounds[0].0 + self.bounds[0].1 - u[0];
        }
        let mut cp = match self.kind {
            ChartKind::HopfRay { phi_map, gamma } => {
                let (phi, dphi) = match phi_map {
                    PhiMap::Linear => (u[0], 1.0),
                    PhiMap::CosSquared => {
                        let phi = u[0].sqrt().acos();
                        (phi, -1.0 / (2.0 * phi).sin())
                    }
                };
                let (a, da) = graded_angle(u[1], gamma);
                let th = u[2];
                let (sp, cph) = phi.sin_cos();
                let (ea, et) = (cis(a), cis(th));
                let dir = CPoint2::new(ea * cph, et * sp);
                ChartPoint {
                    base: CPoint2::ZERO,
                    dbase: [CPoint2::ZERO; 3],
                    dir,
                    ddir: [
                        CPoint2::new(-ea * sp, et * cph) * dphi,
                        CPoint2::new(I * ea * cph * da, c(0.0, 0.0)),
                        CPoint2::new(c(0.0, 0.0), I * et * sp),
                    ],
                }
            }
            ChartKind::WormTube => {
                let (t, alpha, psi) = (u[0], u[1], u[2]);
                let z1 = cis(alpha) * (0.5 * t).exp();
                let et = cis(t);
                let etp = cis(t + psi);
                ChartPoint {
                    base: CPoint2::new(z1, I * et),
                    dbase: [
                        CPoint2::new(z1 * 0.5, -et),
                        CPoint2::new(I * z1, c(0.0, 0.0)),
                        CPoint2::ZERO,
                    ],
                    dir: CPoint2::new(c(0.0, 0.0), -I * etp),
                    ddir: [
                        CPoint2::new(c(0.0, 0.0), etp),
                        CPoint2::ZERO,
                        CPoint2::new(c(0.0, 0.0), etp),
                    ],
                }
            }
            ChartKind::Graph => ChartPoint {
                base: CPoint2::real(u[0], u[1], u[2], 0.0),
                dbase: [
                    CPoint2::real(1.0, 0.0, 0.0, 0.0),
                    CPoint2::real(0.0, 1.0, 0.0, 0.0),
                    CPoint2::real(0.0, 0.0, 1.0, 0.0),
                ],
                dir: CPoint2::real(0.0, 0.0, 0.0, 1.0),
                ddir: [CPoint2::ZERO; 3],
            },
            ChartKind::Local {
                center,
                axes,
                normal,
                ..
            } => ChartPoint {
                base: center + axes[0] * u[0] + axes[1] * u[1] + axes[2] * u[2],
                dbase: axes,
                dir: normal,
                ddir: [CPoint2::ZERO; 3],
            },
        };
        if self.flipped {
            cp.dbase[0] = -cp.dbase[0];
            cp.ddir[0] = -cp.ddir[0];
        }
        cp
    }

    /// Two values of s with ρ(base + s·dir) of opposite signs, negative first.
    pub fn bracket(&self, d: &DomainSpec, cp: &ChartPoint) -> Result<(f64, f64)> {
        let g = |s: f64| d.rho_unchecked(&(cp.base + cp.dir * s));
        let (neg, pos) = match self.kind {
            ChartKind::HopfRay { .. } => {
                let mut hi = 1.0;
                let mut k = 0;
                while g(hi) <= 0.0 && k < 60 {
                    hi *= 2.0;
                    k += 1;
                }
                (0.0, hi)
            }
            ChartKind::WormTube => (0.0, 2.0),
            ChartKind::Graph => {
                let r = self
                    .bounds
                    .iter()
                    .map(|b| b.0.abs().max(b.1.abs()))
                    .fold(0.0, f64::max);
                (r.powi(2) + 1.0, -1.0)
            }
            ChartKind::Local { reach, .. } => {
                // negative side first whichever way the normal points
                if g(-reach) < g(reach) {
                    (-reach, reach)
                } else {
                    (reach, -reach)
                }
            }
        };
        if g(neg) < 0.0 && g(pos) > 0.0 {
            Ok((neg, pos))
        } else {
            Err(LabError::RootFinding {
                chart: self.name.clone(),
                params: [f64::NAN; 3],
            })
        }
    }
}

/// Resolution level n → per-chart counts. Every atlas has 32 n³ nodes.
pub fn atlas(d: &DomainSpec, n: usize, model_radius: f64) -> Result<Vec<Chart>> {
    if n == 0 {
        return Err(LabError::InvalidParameter(
            "resolution must be positive".into(),
        ));
    }
    let tau = 2.0 * PI;
    match d.kind() {
        DomainKind::Ball { .. } | DomainKind::Ellipsoid { .. } => {
            let gamma = match d.kind() {
                DomainKind::Ellipsoid { r, .. } if r < 2.0 => 2.0 / (r - 1.0),
                _ => 1.0,
            };
            let kind = ChartKind::HopfRay {
                phi_map: PhiMap::Linear,
                gamma,
            };
            Ok([(0.0, FRAC_PI_4), (FRAC_PI_4, FRAC_PI_2)]
                .iter()
                .enumerate()
                .map(|(k, &phi)| Chart {
                    name: format!("hopf-{k}"),
                    kind,
                    bounds: [phi, (0.0, 4.0), (0.0, tau)],
                    periodic: [false, true, true],
                    periodic_offset: [0.5, 0.5, 0.5],
                    counts: [n, 4 * n, 4 * n],
                    flipped: false,
                })
                .collect())
        }
        DomainKind::Worm { beta, mu } => {
            let tmax = worm_sampled_half_width(beta, mu);
            Ok(vec![Chart {
                name: "worm-tube".into(),
                kind: ChartKind::WormTube,
                bounds: [(-tmax, tmax), (0.0, tau), (0.0, tau)],
                periodic: [false, true, true],
                // ψ = 0 is the annulus side of each z₂-circle
                periodic_offset: [0.5, 0.5, 0.0],
                counts: [2 * n, 4 * n, 4 * n],
                flipped: false,
            }])
        }
        DomainKind::Model(_) => {
            if !(model_radius > 0.0) {
                return Err(LabError::InvalidParameter(format!(
                    "model radius {model_radius}"
                )));
            }
            let r = model_radius;
            Ok(vec![Chart {
                name: "graph".into(),
                kind: ChartKind::Graph,
                bounds: [(-r, r), (-r, r), (-r, r)],
                periodic: [false, false, false],
                periodic_offset: [0.5; 3],
                counts: [4 * n, 4 * n, 2 * n],
                flipped: false,
            }])
        }
        DomainKind::Custom => Err(LabError::MissingAtlas(d.id().to_string())),
    }
}

/// A local patch around the boundary point `center`: the axes are the real
/// tangent directions (Re T, Im T, iν) scaled by `scales`, where ν is the
/// outward unit normal and T the unit complex tangent (−∂̄ρ₂, ∂̄ρ₁)/|∂ρ|.
/// Parameters run over `[-half_width, half_width]³` with `count` nodes per axis.
pub fn local_patch(
    d: &DomainSpec,
    center: CPoint2,
    scales: [f64; 3],
    half_width: f64,
    count: usize,
    reach: f64,
) -> Result<Chart> {
    d.require_on_boundary(&center)?;
    if count == 0 || !(half_width > 0.0) || !(reach > 0.0) || scales.iter().any(|s| !(*s > 0.0)) {
        return Err(LabError::InvalidParameter(format!(
            "local patch: scales {scales:?}, half width {half_width}, count {count}, reach {reach}"
        )));
    }
    let g = d.grad(&center)?;
    let norm = (g[0].norm_sqr() + g[1].norm_sqr()).sqrt();
    // the outward real normal is ∇ρ = 2·conj(∂ρ)
    let normal = CPoint2::new(g[0].conj(), g[1].conj()) * (1.0 / norm);
    let tangent = CPoint2::new(-g[1], g[0]) * (1.0 / norm);
    let axes = [
        tangent * scales[0],
        tangent.scale_c(I) * scales[1],
        normal.scale_c(I) * scales[2],
    ];
    let h = half_width;
    Ok(Chart {
        name: "local".into(),
        kind: ChartKind::Local {
            center,
            axes,
            normal,
            reach,
        },
        bounds: [(-h, h); 3],
        periodic: [false; 3],
        periodic_offset: [0.5; 3],
        counts: [count; 3],
        flipped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_ball, make_ellipsoid, make_worm};

    #[test]
    fn graded_angle_is_monotone_and_covers_circle() {
        for gamma in [1.0, 4.0] {
            let mut prev = -1.0;
            for k in 0..=400 {
                let (a, da) = graded_angle(k as f64 / 100.0, gamma);
                assert!(a >= prev && da >= 0.0);
                prev = a;
            }
            assert!((graded_angle(0.0, gamma).0).abs() < 1e-15);
            assert!((graded_angle(4.0, gamma).0 - 2.0 * PI).abs() < 1e-12);
        }
        // derivative check
        let (a0, da) = graded_angle(1.3, 4.0);
        let (a1, _) = graded_angle(1.3 + 1e-6, 4.0);
        assert!(((a1 - a0) / 1e-6 - da).abs() < 1e-4);
    }

    #[test]
    fn every_atlas_has_32_n_cubed_nodes() {
        for d in [
            make_ball(),
            make_ellipsoid(1.5, 2.0).unwrap(),
            make_worm(2.2, 1.0).unwrap(),
        ] {
            let total: usize = atlas(&d, 3, 4.0)
                .unwrap()
                .iter()
                .map(|c| c.node_count())
                .sum();
            assert_eq!(total, 32 * 27);
        }
    }
}
