use super::charts::{atlas, Chart, ChartKind};
use super::forms::{cauchy_leray_form, leray_levi_form};
use super::quadrature::{AxisRule, QuadratureRule};
use crate::cpoint::{det3, det4, CPoint2, C64};
use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::geometry::DomainSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// |(2πi)^{-4}|
pub const LEVI_SCALE: f64 = 1.0 / (16.0 * PI * PI * PI * PI);

/// Sign applied to the oriented value of ∂ρ ∧ ∂̄∂ρ so that λ ≥ 0 on the
/// unit sphere (Stokes orientation, outward normal first).
pub const LEVI_SIGN: f64 = -1.0;

/// (2πi)^{-2}
pub fn cl_constant() -> C64 {
    C64::new(-1.0 / (4.0 * PI * PI), 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshOptions {
    pub resolution: usize,
    pub quadrature: QuadratureRule,
    /// Truncation radius for the unbounded model domains.
    pub model_radius: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            resolution: 4,
            quadrature: QuadratureRule::Midpoint,
            model_radius: 4.0,
        }
    }
}

impl MeshOptions {
    pub fn new(resolution: usize) -> Self {
        Self {
            resolution,
            ..Self::default()
        }
    }
}

/// Quadrature nodes on bD with frames and per-node measure weights.
///
/// `sigma_weights` and `lambda_weights` are densities times the chart
/// quadrature weight. `cl_weights` hold (2πi)^{-2}·j*(∂ρ ∧ d_w∂ρ) on the
/// oriented frame times the same weight, i.e. the Cauchy-Leray numerator.
#[derive(Clone, Debug)]
pub struct BoundaryMesh {
    pub domain_id: String,
    pub resolution: usize,
    pub quadrature: QuadratureRule,
    pub model_radius: f64,
    pub charts: Vec<Chart>,
    pub nodes: Vec<CPoint2>,
    pub frames: Vec<[CPoint2; 3]>,
    pub patch_ids: Vec<u32>,
    pub param_coords: Vec<[f64; 3]>,
    pub param_weights: Vec<f64>,
    /// Complex gradient ∂ρ at each node.
    pub gradients: Vec<[C64; 2]>,
    /// Outward unit normal in R⁴.
    pub normals: Vec<[f64; 4]>,
    pub cell_diameters: Vec<f64>,
    /// ±1: sign of det(∇ρ, t₁, t₂, t₃).
    pub orientation: Vec<i8>,
    pub sigma_weights: Vec<f64>,
    pub lambda_weights: Vec<f64>,
    pub cl_weights: Vec<C64>,
    /// Nodes where λ came out below −1e-12 relative to Σ.
    pub normalization_faults: usize,
}

/// Per-node geometry before weighting.
#[derive(Clone, Copy, Debug)]
pub struct NodeGeometry {
    pub point: CPoint2,
    pub frame: [CPoint2; 3],
}

fn drho(grad: &[C64; 2], v: &CPoint2) -> f64 {
    2.0 * CPoint2::pair(grad, v).re
}

/// Places the node of `chart` at parameters `u` on bD and differentiates the
/// constraint to get the tangent frame.
pub fn solve_node(d: &DomainSpec, chart: &Chart, u: [f64; 3]) -> Result<NodeGeometry> {
    let fail = || LabError::RootFinding {
        chart: chart.name.clone(),
        params: u,
    };
    let cp = chart.eval(u);
    let (mut neg, mut pos) = chart.bracket(d, &cp).map_err(|_| fail())?;
    let at = |s: f64| cp.base + cp.dir * s;
    let mut s = 0.5 * (neg + pos);
    let mut converged = false;
    for _ in 0..200 {
        let p = at(s);
        d.function().admits(&p).map_err(|_| fail())?;
        let g = d.rho_unchecked(&p);
        if g == 0.0 {
            converged = true;
            break;
        }
        if g < 0.0 {
            neg = s;
        } else {
            pos = s;
        }
        let slope = drho(&d.grad(&p)?, &cp.dir);
        let newton = s - g / slope;
        let inside = newton.is_finite() && (newton - neg) * (newton - pos) < 0.0;
        let next = if inside { newton } else { 0.5 * (neg + pos) };
        let step = (next - s).abs();
        s = next;
        if step <= 4.0 * f64::EPSILON * s.abs().max(1e-300) {
            converged = true;
            break;
        }
    }
    let point = at(s);
    if !converged || !d.is_on_boundary(&point).map_err(|_| fail())? {
        return Err(fail());
    }
    let grad = d.grad(&point)?;
    let normal_slope = drho(&grad, &cp.dir);
    let frame = std::array::from_fn(|i| {
        let v = cp.dbase[i] + cp.ddir[i] * s;
        let si = -drho(&grad, &v) / normal_slope;
        v + cp.dir * si
    });
    Ok(NodeGeometry { point, frame })
}

/// √det of the real Gram matrix of the frame: the Σ-density per unit
/// parameter volume.
pub fn sigma_density(frame: &[CPoint2; 3]) -> Option<f64> {
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = frame[i].dot_real(&frame[j]);
        }
    }
    let det = det3(g);
    (det > 0.0 && det.is_finite()).then(|| det.sqrt())
}

/// Sign of det(∇ρ, t₁, t₂, t₃): +1 when the frame is positively oriented
/// as the boundary of D.
pub fn frame_orientation(grad_real: &[f64; 4], frame: &[CPoint2; 3]) -> i8 {
    let m = [
        grad_real.to_owned(),
        frame[0].to_real(),
        frame[1].to_real(),
        frame[2].to_real(),
    ];
    if det4(m) >= 0.0 {
        1
    } else {
        -1
    }
}

/// Oriented λ-density per unit parameter volume.
pub fn leray_levi_density(d: &DomainSpec, node: &NodeGeometry) -> Result<f64> {
    let der = d.derivatives(&node.point)?;
    let orient = frame_orientation(&d.grad_real(&node.point)?, &node.frame) as f64;
    Ok(LEVI_SIGN * LEVI_SCALE * orient * leray_levi_form(&der).eval(&node.frame).re)
}

fn axis_rule(chart: &Chart, axis: usize, rule: QuadratureRule) -> AxisRule {
    let (lo, hi) = chart.bounds[axis];
    let n = chart.counts[axis];
    if chart.periodic[axis] {
        AxisRule::offset(lo, hi, n, chart.periodic_offset[axis])
    } else {
        AxisRule::new(rule, lo, hi, n)
    }
}

struct NodeRecord {
    geom: NodeGeometry,
    u: [f64; 3],
    weight: f64,
    grad: [C64; 2],
    normal: [f64; 4],
    diameter: f64,
    orientation: i8,
    sigma: f64,
    lambda: f64,
    cl: C64,
    fault: bool,
}

fn build_node(
    d: &DomainSpec,
    chart: &Chart,
    node_index: usize,
    u: [f64; 3],
    widths: [f64; 3],
) -> Result<NodeRecord> {
    let geom = solve_node(d, chart, u)?;
    let weight = widths.iter().product::<f64>();
    let sigma = sigma_density(&geom.frame).ok_or_else(|| LabError::DegenerateFrame {
        node: node_index,
        gram: {
            let f = &geom.frame;
            det3(std::array::from_fn(|i| {
                std::array::from_fn(|j| f[i].dot_real(&f[j]))
            }))
        },
    })?;
    let der = d.derivatives(&geom.point)?;
    let grad_real = d.grad_real(&geom.point)?;
    let gnorm = grad_real.iter().map(|x| x * x).sum::<f64>().sqrt();
    let orientation = frame_orientation(&grad_real, &geom.frame);
    let orient = orientation as f64;
    let mut lambda = LEVI_SIGN * LEVI_SCALE * orient * leray_levi_form(&der).eval(&geom.frame).re;
    let fault = lambda < -1e-12 * sigma;
    if lambda < 0.0 && !fault {
        lambda = 0.0;
    }
    let cl = cl_constant() * orient * cauchy_leray_form(&der).eval(&geom.frame) * weight;
    let diameter = (0..3)
        .map(|k| (geom.frame[k].norm() * widths[k]).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(NodeRecord {
        geom,
        u,
        weight,
        grad: der.grad,
        normal: grad_real.map(|x| x / gnorm),
        diameter,
        orientation,
        sigma: sigma * weight,
        lambda: lambda * weight,
        cl,
        fault,
    })
}

/// Builds the mesh of `d` on its registered atlas.
pub fn parametrize(d: &DomainSpec, opts: &MeshOptions, exec: Exec) -> Result<BoundaryMesh> {
    let charts = atlas(d, opts.resolution, opts.model_radius)?;
    parametrize_charts(d, charts, opts, exec)
}

/// Builds a mesh on explicitly supplied charts.
pub fn parametrize_charts(
    d: &DomainSpec,
    charts: Vec<Chart>,
    opts: &MeshOptions,
    exec: Exec,
) -> Result<BoundaryMesh> {
    let total: usize = charts.iter().map(|c| c.node_count()).sum();
    let mut mesh = BoundaryMesh {
        domain_id: d.id().to_string(),
        resolution: opts.resolution,
        quadrature: opts.quadrature,
        model_radius: opts.model_radius,
        charts: Vec::new(),
        nodes: Vec::with_capacity(total),
        frames: Vec::with_capacity(total),
        patch_ids: Vec::with_capacity(total),
        param_coords: Vec::with_capacity(total),
        param_weights: Vec::with_capacity(total),
        gradients: Vec::with_capacity(total),
        normals: Vec::with_capacity(total),
        cell_diameters: Vec::with_capacity(total),
        orientation: Vec::with_capacity(total),
        sigma_weights: Vec::with_capacity(total),
        lambda_weights: Vec::with_capacity(total),
        cl_weights: Vec::with_capacity(total),
        normalization_faults: 0,
    };
    for (patch, chart) in charts.iter().enumerate() {
        let rules: [AxisRule; 3] = std::array::from_fn(|a| axis_rule(chart, a, opts.quadrature));
        let [n0, n1, n2] = chart.counts;
        let offset = mesh.nodes.len();
        let records = exec.try_map(n0 * n1 * n2, |idx| {
            let (i, j, k) = (idx / (n1 * n2), (idx / n2) % n1, idx % n2);
            let u = [rules[0].nodes[i], rules[1].nodes[j], rules[2].nodes[k]];
            let widths = [
                rules[0].weights[i],
                rules[1].weights[j],
                rules[2].weights[k],
            ];
            build_node(d, chart, offset + idx, u, widths)
        })?;
        for r in records {
            mesh.nodes.push(r.geom.point);
            mesh.frames.push(r.geom.frame);
            mesh.patch_ids.push(patch as u32);
            mesh.param_coords.push(r.u);
            mesh.param_weights.push(r.weight);
            mesh.gradients.push(r.grad);
            mesh.normals.push(r.normal);
            mesh.cell_diameters.push(r.diameter);
            mesh.orientation.push(r.orientation);
            mesh.sigma_weights.push(r.sigma);
            mesh.lambda_weights.push(r.lambda);
            mesh.cl_weights.push(r.cl);
            mesh.normalization_faults += r.fault as usize;
        }
    }
    mesh.charts = charts;
    Ok(mesh)
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_sigma(&self) -> f64 {
        self.sigma_weights.iter().sum()
    }

    pub fn total_lambda(&self) -> f64 {
        self.lambda_weights.iter().sum()
    }

    pub fn total_cl(&self) -> C64 {
        self.cl_weights.iter().sum()
    }

    pub fn per_chart_counts(&self) -> Vec<[usize; 3]> {
        self.charts.iter().map(|c| c.counts).collect()
    }

    /// Whether the atlas covers bD up to a null set (false for the truncated
    /// worm and model atlases).
    pub fn covers_boundary(&self) -> bool {
        self.charts
            .iter()
            .all(|c| matches!(c.kind, ChartKind::HopfRay { .. }))
    }

    pub fn max_cell_diameter(&self) -> f64 {
        self.cell_diameters.iter().copied().fold(0.0, f64::max)
    }

    /// Oriented pull-back of a 3-form to every node (coefficient relative to
    /// the chart parameter volume).
    pub fn pull_back<F>(&self, form: F) -> PulledBackForm
    where
        F: Fn(&CPoint2) -> super::forms::ThreeForm,
    {
        PulledBackForm {
            coefficients: (0..self.len())
                .map(|i| form(&self.nodes[i]).eval(&self.frames[i]))
                .collect(),
        }
    }
}

/// Values of a 3-form on the node frames, relative to parameter volume.
#[derive(Clone, Debug)]
pub struct PulledBackForm {
    pub coefficients: Vec<C64>,
}

impl PulledBackForm {
    /// ∫ over the oriented boundary: Σ orientation·coefficient·weight.
    pub fn integrate(&self, mesh: &BoundaryMesh) -> C64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * (mesh.orientation[i] as f64 * mesh.param_weights[i]))
            .sum()
    }
}

/// Random points of bD drawn uniformly in chart parameters.
pub fn sample_boundary_points(
    d: &DomainSpec,
    count: usize,
    seed: u64,
    model_radius: f64,
) -> Result<Vec<CPoint2>> {
    let charts = atlas(d, 1, model_radius)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count + 100 {
            return Err(LabError::RootFinding {
                chart: "sampling".into(),
                params: [f64::NAN; 3],
            });
        }
        let chart = &charts[rng.random_range(0..charts.len())];
        let u = std::array::from_fn(|a| {
            let (lo, hi) = chart.bounds[a];
            rng.random_range(lo..hi)
        });
        if let Ok(g) = solve_node(d, chart, u) {
            out.push(g.point);
        }
    }
    Ok(out)
}
