//! Concentrating bump families and the off-support Cauchy-Leray transform
//! they feed.
//!
//! Level δ lives on a local patch around the center with axis scales
//! aₖ·δ^{eₖ} along (Re T, Im T, iν); in those scaled coordinates the bump is
//! (1 − |u|²)³ on the unit ball and the test set is the shell
//! `inner ≤ |u|`, `|u|∞ ≤ half width`. Both are sampled on their own
//! patches so the discretization is the same at every level.

use super::config::MaskConfig;
use crate::boundary::{
    cl_constant, forms::cauchy_leray_form, frame_orientation, local_patch, parametrize_charts,
    BoundaryMesh, Chart, MeshOptions,
};
use crate::cpoint::{CPoint2, C64};
use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::geometry::{DomainKind, DomainSpec};
use crate::operators::{cl_denominator_from_grad, KernelKind, MeasureTag, DIAGONAL_CUTOFF};

/// Largest normal excursion searched when placing patch nodes.
const PATCH_REACH: f64 = 0.5;

fn radius(u: &[f64; 3]) -> f64 {
    (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt()
}

/// C¹ (indeed C²) bump profile (1 − t²)³ on t < 1.
pub fn bump_profile(t: f64) -> f64 {
    if t < 1.0 {
        (1.0 - t * t).powi(3)
    } else {
        0.0
    }
}

/// Axis exponents (1, r/q, r) for the ellipsoid |Re z₁|^r + |Im z₁|^q + |z₂|² < 1
/// at points of {z₁ = 0}; the ball is the case r = q = 2.
pub fn anisotropy_exponents(d: &DomainSpec) -> Result<[f64; 3]> {
    match d.kind() {
        DomainKind::Ball { .. } => Ok([1.0, 1.0, 2.0]),
        DomainKind::Ellipsoid { r, q } => Ok([1.0, r / q, r]),
        _ => Err(LabError::InvalidParameter(format!(
            "no concentration scaling registered for `{}`",
            d.id()
        ))),
    }
}

#[derive(Clone, Debug)]
pub struct BumpFamily {
    pub center: CPoint2,
    pub exponents: [f64; 3],
    pub prefactors: [f64; 3],
    pub deltas: Vec<f64>,
    pub masks: MaskConfig,
}

/// One level: support and test patches with the sampled bump.
#[derive(Clone, Debug)]
pub struct BumpLevel {
    pub delta: f64,
    pub scales: [f64; 3],
    pub support_chart: Chart,
    pub support: BoundaryMesh,
    pub test: BoundaryMesh,
    /// Bump values on the support patch.
    pub values: Vec<f64>,
    /// Indices of test-patch nodes in the test set S.
    pub test_set: Vec<usize>,
    /// Minimum Euclidean distance between S and supp f.
    pub gap: f64,
    /// Support patch nodes with f > 0.
    pub support_nodes: usize,
}

impl BumpFamily {
    pub fn new(
        d: &DomainSpec,
        center: CPoint2,
        deltas: Vec<f64>,
        masks: MaskConfig,
    ) -> Result<Self> {
        d.require_on_boundary(&center)?;
        if deltas.is_empty()
            || deltas.windows(2).any(|w| w[1] >= w[0])
            || deltas.iter().any(|x| !(*x > 0.0))
        {
            return Err(LabError::InvalidParameter(format!(
                "levels must be positive and strictly decreasing: {deltas:?}"
            )));
        }
        Ok(Self {
            center,
            exponents: anisotropy_exponents(d)?,
            prefactors: masks.axis_prefactors,
            deltas,
            masks,
        })
    }

    pub fn scales(&self, delta: f64) -> [f64; 3] {
        std::array::from_fn(|k| self.prefactors[k] * delta.powf(self.exponents[k]))
    }

    /// Bump value at scaled coordinates `u`.
    pub fn value(&self, u: &[f64; 3]) -> f64 {
        bump_profile(radius(u) / self.masks.support_radius)
    }

    pub fn level(&self, d: &DomainSpec, delta: f64, exec: Exec) -> Result<BumpLevel> {
        let m = &self.masks;
        let scales = self.scales(delta);
        let support_chart = local_patch(
            d,
            self.center,
            scales,
            m.support_radius,
            m.support_nodes,
            PATCH_REACH,
        )?;
        let test_chart = local_patch(
            d,
            self.center,
            scales,
            m.test_half_width,
            m.test_nodes,
            PATCH_REACH,
        )?;
        let opts = MeshOptions::new(1);
        let support = parametrize_charts(d, vec![support_chart.clone()], &opts, exec)?;
        let test = parametrize_charts(d, vec![test_chart], &opts, exec)?;
        let values: Vec<f64> = support.param_coords.iter().map(|u| self.value(u)).collect();
        let test_set: Vec<usize> = (0..test.len())
            .filter(|&i| radius(&test.param_coords[i]) >= m.test_inner_radius)
            .collect();
        let inside: Vec<usize> = (0..support.len()).filter(|&j| values[j] > 0.0).collect();
        if inside.len() < 4 {
            return Err(LabError::InvalidParameter(format!(
                "bump at delta {delta} covers {} cells (< 4)",
                inside.len()
            )));
        }
        if test_set.is_empty() {
            return Err(LabError::EmptyMask);
        }
        let gap = exec
            .map(test_set.len(), |a| {
                let z = test.nodes[test_set[a]];
                inside
                    .iter()
                    .map(|&j| support.nodes[j].dist(&z))
                    .fold(f64::INFINITY, f64::min)
            })
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if !(gap > 0.0) {
            return Err(LabError::SupportDistance {
                distance: gap,
                required: 0.0,
            });
        }
        Ok(BumpLevel {
            delta,
            scales,
            support_chart,
            support,
            test,
            values,
            test_set,
            gap,
            support_nodes: inside.len(),
        })
    }
}

/// Kernel contribution f·K·weight of a (sub)cell centered at scaled `u`
/// with width `h`, plus |den| and its first-order variation over the cell.
fn cell_term(
    d: &DomainSpec,
    chart: &Chart,
    family: &BumpFamily,
    u: [f64; 3],
    h: f64,
    z: &CPoint2,
) -> Result<(C64, f64, f64)> {
    let g = crate::boundary::solve_node(d, chart, u)?;
    let der = d.derivatives(&g.point)?;
    let den = cl_denominator_from_grad(&der.grad, z, &g.point);
    let var = (0..3)
        .map(|k| CPoint2::pair(&der.grad, &g.frame[k]).norm() * h)
        .fold(0.0, f64::max);
    let f = family.value(&u);
    if f == 0.0 {
        return Ok((C64::new(0.0, 0.0), den.norm(), var));
    }
    if den.norm() < DIAGONAL_CUTOFF {
        return Err(LabError::NearDiagonal {
            denominator: den.norm(),
        });
    }
    let orient = frame_orientation(&d.grad_real(&g.point)?, &g.frame) as f64;
    let w = cl_constant() * orient * cauchy_leray_form(&der).eval(&g.frame) * h.powi(3);
    Ok((w * f / (den * den), den.norm(), var))
}

#[allow(clippy::too_many_arguments)]
fn refine(
    d: &DomainSpec,
    chart: &Chart,
    family: &BumpFamily,
    u: [f64; 3],
    h: f64,
    depth: u32,
    z: &CPoint2,
    count: &mut usize,
) -> Result<C64> {
    let (term, den, var) = cell_term(d, chart, family, u, h, z)?;
    *count += 1;
    let m = &family.masks;
    if den >= m.refine_ratio * var || depth >= m.refine_depth {
        return Ok(term);
    }
    let q = 0.25 * h;
    let mut sum = C64::new(0.0, 0.0);
    for c in 0..8 {
        let child = [
            u[0] + if c & 1 == 0 { -q } else { q },
            u[1] + if c & 2 == 0 { -q } else { q },
            u[2] + if c & 4 == 0 { -q } else { q },
        ];
        sum += refine(d, chart, family, child, 0.5 * h, depth + 1, z, count)?;
    }
    Ok(sum)
}

/// (C f)(z) on the test set S, with support cells whose denominator varies by
/// more than `refine_ratio`·|den| across the cell split recursively. Returns
/// the values and the number of refined cell evaluations.
pub fn transform_on_test_set(
    d: &DomainSpec,
    family: &BumpFamily,
    level: &BumpLevel,
    exec: Exec,
) -> Result<(Vec<C64>, usize)> {
    let sup = &level.support;
    let h = 2.0 * family.masks.support_radius / family.masks.support_nodes as f64;
    // cells that touch the support ball
    let reach = family.masks.support_radius + h * 3f64.sqrt();
    let cells: Vec<usize> = (0..sup.len())
        .filter(|&j| radius(&sup.param_coords[j]) < reach)
        .collect();
    let per_point = exec.try_map(level.test_set.len(), |a| {
        let z = level.test.nodes[level.test_set[a]];
        let mut count = 0;
        let mut sum = C64::new(0.0, 0.0);
        for &j in &cells {
            let den = cl_denominator_from_grad(&sup.gradients[j], &z, &sup.nodes[j]);
            let var = (0..3)
                .map(|k| CPoint2::pair(&sup.gradients[j], &sup.frames[j][k]).norm() * h)
                .fold(0.0, f64::max);
            if den.norm() >= family.masks.refine_ratio * var {
                if level.values[j] != 0.0 {
                    sum += KernelKind::CauchyLeray.weighted(sup, j, &z)? * level.values[j];
                }
            } else {
                sum += refine(
                    d,
                    &level.support_chart,
                    family,
                    sup.param_coords[j],
                    h,
                    0,
                    &z,
                    &mut count,
                )?;
            }
        }
        Ok::<_, LabError>((sum, count))
    })?;
    let refined = per_point.iter().map(|x| x.1).sum();
    Ok((per_point.into_iter().map(|x| x.0).collect(), refined))
}

/// ‖C f‖_{Lᵖ(S, μ)} / ‖f‖_{Lᵖ(μ)}.
pub fn concentration_ratio(level: &BumpLevel, cf: &[C64], p: f64, tag: MeasureTag) -> f64 {
    let wt = tag.weights(&level.test);
    let ws = tag.weights(&level.support);
    let num: f64 = level
        .test_set
        .iter()
        .zip(cf)
        .map(|(&i, v)| v.norm().powf(p) * wt[i])
        .sum();
    let den: f64 = level
        .values
        .iter()
        .zip(ws)
        .map(|(f, w)| f.powf(p) * w)
        .sum();
    (num / den).powf(1.0 / p)
}

/// Same ratio with S the nodes of a global mesh at distance ≥ `far` from the
/// center, held fixed across levels; plain quadrature suffices there.
pub fn far_set_ratio(
    level: &BumpLevel,
    global: &BoundaryMesh,
    far_set: &[usize],
    p: f64,
    tag: MeasureTag,
    exec: Exec,
) -> Result<f64> {
    let sup = &level.support;
    let cells: Vec<usize> = (0..sup.len()).filter(|&j| level.values[j] > 0.0).collect();
    let cf = exec.try_map(far_set.len(), |a| {
        let z = global.nodes[far_set[a]];
        let mut s = C64::new(0.0, 0.0);
        for &j in &cells {
            s += KernelKind::CauchyLeray.weighted(sup, j, &z)? * level.values[j];
        }
        Ok::<_, LabError>(s)
    })?;
    let wg = tag.weights(global);
    let ws = tag.weights(sup);
    let num: f64 = far_set
        .iter()
        .zip(&cf)
        .map(|(&i, v)| v.norm().powf(p) * wg[i])
        .sum();
    let den: f64 = level
        .values
        .iter()
        .zip(ws)
        .map(|(f, w)| f.powf(p) * w)
        .sum();
    Ok((num / den).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_ball, make_ellipsoid};

    #[test]
    fn profile_is_c1_at_the_support_edge() {
        assert_eq!(bump_profile(1.0), 0.0);
        assert_eq!(bump_profile(0.0), 1.0);
        let slope = (bump_profile(1.0 - 1e-6) - bump_profile(1.0 - 2e-6)) / 1e-6;
        assert!(slope.abs() < 1e-9);
    }

    #[test]
    fn exponents_follow_the_ellipsoid() {
        assert_eq!(
            anisotropy_exponents(&make_ellipsoid(2.0, 4.0).unwrap()).unwrap(),
            [1.0, 0.5, 2.0]
        );
        assert_eq!(
            anisotropy_exponents(&make_ellipsoid(1.5, 2.0).unwrap()).unwrap(),
            [1.0, 0.75, 1.5]
        );
        assert_eq!(anisotropy_exponents(&make_ball()).unwrap(), [1.0, 1.0, 2.0]);
    }

    #[test]
    fn levels_keep_test_set_away_from_support() {
        let d = make_ball();
        let masks = MaskConfig {
            support_nodes: 6,
            test_nodes: 6,
            ..MaskConfig::default()
        };
        let fam =
            BumpFamily::new(&d, CPoint2::real(0.0, 0.0, 1.0, 0.0), vec![0.2, 0.1], masks).unwrap();
        for &delta in &fam.deltas {
            let lvl = fam.level(&d, delta, Exec::Sequential).unwrap();
            let min_scale = lvl.scales.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(lvl.gap > 0.5 * min_scale);
            assert!(lvl
                .test_set
                .iter()
                .all(|&i| radius(&lvl.test.param_coords[i]) >= 2.0));
        }
        assert!(BumpFamily::new(
            &d,
            CPoint2::real(0.0, 0.0, 0.5, 0.0),
            vec![0.1],
            MaskConfig::default()
        )
        .is_err());
        assert!(BumpFamily::new(
            &d,
            CPoint2::real(0.0, 0.0, 1.0, 0.0),
            vec![0.1, 0.2],
            MaskConfig::default()
        )
        .is_err());
    }
}
