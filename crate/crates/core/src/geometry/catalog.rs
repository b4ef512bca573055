use super::{
    make_ball, make_ball_radius, make_ellipsoid, make_model_graph, make_worm, DomainSpec, ModelKind,
};
use crate::error::{LabError, Result};

/// String ids of the built-in catalog.
pub const CATALOG_IDS: [&str; 6] = [
    "ball",
    "ellipsoid:r=2,q=4",
    "ellipsoid:r=1.5,q=2",
    "worm:beta=2.2,mu=1",
    "model:parabolic",
    "model:power,m=1.5",
];

fn params(s: &str) -> Result<Vec<(&str, f64)>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| LabError::Config(format!("expected key=value, got `{t}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| LabError::Config(format!("bad number in `{t}`")))?;
            Ok((k.trim(), v))
        })
        .collect()
}

fn take(ps: &[(&str, f64)], key: &str, id: &str) -> Result<f64> {
    ps.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| LabError::Config(format!("domain id `{id}` lacks `{key}`")))
}

fn reject_unknown(ps: &[(&str, f64)], allowed: &[&str], id: &str) -> Result<()> {
    match ps.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, _)) => Err(LabError::Config(format!(
            "unknown key `{k}` in domain id `{id}`"
        ))),
        None => Ok(()),
    }
}

/// Builds a domain from its catalog id, e.g. `"ellipsoid:r=2,q=4"`.
pub fn parse_domain_id(id: &str) -> Result<DomainSpec> {
    let id = id.trim();
    let (head, rest) = id.split_once(':').unwrap_or((id, ""));
    match head {
        "ball" => {
            let ps = params(rest)?;
            reject_unknown(&ps, &["radius"], id)?;
            match ps.first() {
                Some(_) => make_ball_radius(take(&ps, "radius", id)?),
                None => Ok(make_ball()),
            }
        }
        "ellipsoid" => {
            let ps = params(rest)?;
            reject_unknown(&ps, &["r", "q"], id)?;
            make_ellipsoid(take(&ps, "r", id)?, take(&ps, "q", id)?)
        }
        "worm" => {
            let ps = params(rest)?;
            reject_unknown(&ps, &["beta", "mu"], id)?;
            make_worm(take(&ps, "beta", id)?, take(&ps, "mu", id)?)
        }
        "model" => {
            let (kind, rest) = rest.split_once(',').unwrap_or((rest, ""));
            let ps = params(rest)?;
            match kind.trim() {
                "parabolic" => {
                    reject_unknown(&ps, &[], id)?;
                    make_model_graph(ModelKind::Parabolic)
                }
                "power" => {
                    reject_unknown(&ps, &["m"], id)?;
                    make_model_graph(ModelKind::Power(take(&ps, "m", id)?))
                }
                other => Err(LabError::Config(format!("unknown model kind `{other}`"))),
            }
        }
        _ => Err(LabError::Config(format!("unknown domain id `{id}`"))),
    }
}
