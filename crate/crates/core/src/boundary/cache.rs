//! Binary mesh cache.
//!
//! Little-endian layout:
//!
//! ```text
//! magic      8 bytes  "CLLABMSH"
//! format     u32      FORMAT_VERSION
//! atlas      u32      ATLAS_VERSION of the writer
//! header     domain id (u32 length + UTF-8), resolution u32, quadrature u8,
//!            model radius f64, chart count u32, then per chart:
//!            name (u32 length + UTF-8), kind u8 (0 hopf, 1 worm, 2 graph, 3 local),
//!            hopf only: phi map u8 (0 linear, 1 cos²) and gamma f64,
//!            local only: center, 3 axes and normal as 4×f64 each, reach f64,
//!            bounds 6×f64, periodic 3×u8, offsets 3×f64, counts 3×u32,
//!            flipped u8
//! counts     node count u64, normalization faults u64
//! sections   one contiguous array per field, in this order:
//!            nodes 4×f64, frames 12×f64, patch ids u32, param coords 3×f64,
//!            param weights f64, gradients 4×f64, normals 4×f64,
//!            cell diameters f64, orientation i8, sigma f64, lambda f64,
//!            cl weights 2×f64
//! trailer    SHA-256 of every preceding byte
//! ```
//!
//! Files are named `<id>-a<atlas>-n<resolution>-<rule>[-R<radius>].mesh`
//! with the id's punctuation replaced by `_`.

use super::charts::{Chart, ChartKind, PhiMap, ATLAS_VERSION};
use super::mesh::{parametrize, BoundaryMesh, MeshOptions};
use super::quadrature::QuadratureRule;
use crate::cpoint::{CPoint2, C64};
use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::geometry::{DomainKind, DomainSpec};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const MAGIC: &[u8; 8] = b"CLLABMSH";
pub const FORMAT_VERSION: u32 = 1;

const NODE_BYTES: usize = 269;

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
    fn point(&mut self, p: &CPoint2) {
        p.to_real().iter().for_each(|&x| self.f64(x));
    }
    fn c64(&mut self, z: C64) {
        self.f64(z.re);
        self.f64(z.im);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| LabError::CacheFormat("truncated file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| LabError::CacheFormat("invalid UTF-8 string".into()))
    }
    fn point(&mut self) -> Result<CPoint2> {
        Ok(CPoint2::real(
            self.f64()?,
            self.f64()?,
            self.f64()?,
            self.f64()?,
        ))
    }
    fn c64(&mut self) -> Result<C64> {
        Ok(C64::new(self.f64()?, self.f64()?))
    }
}

fn write_chart(w: &mut Writer, c: &Chart) {
    w.str(&c.name);
    match c.kind {
        ChartKind::HopfRay { phi_map, gamma } => {
            w.u8(0);
            w.u8(match phi_map {
                PhiMap::Linear => 0,
                PhiMap::CosSquared => 1,
            });
            w.f64(gamma);
        }
        ChartKind::WormTube => w.u8(1),
        ChartKind::Graph => w.u8(2),
        ChartKind::Local {
            center,
            axes,
            normal,
            reach,
        } => {
            w.u8(3);
            for p in [center, axes[0], axes[1], axes[2], normal] {
                p.to_real().iter().for_each(|&x| w.f64(x));
            }
            w.f64(reach);
        }
    }
    for (lo, hi) in c.bounds {
        w.f64(lo);
        w.f64(hi);
    }
    c.periodic.iter().for_each(|&p| w.u8(p as u8));
    c.periodic_offset.iter().for_each(|&o| w.f64(o));
    c.counts.iter().for_each(|&n| w.u32(n as u32));
    w.u8(c.flipped as u8);
}

fn read_chart(r: &mut Reader) -> Result<Chart> {
    let name = r.str()?;
    let kind = match r.u8()? {
        0 => {
            let phi_map = match r.u8()? {
                0 => PhiMap::Linear,
                1 => PhiMap::CosSquared,
                t => return Err(LabError::CacheFormat(format!("unknown phi map {t}"))),
            };
            ChartKind::HopfRay {
                phi_map,
                gamma: r.f64()?,
            }
        }
        1 => ChartKind::WormTube,
        2 => ChartKind::Graph,
        3 => ChartKind::Local {
            center: r.point()?,
            axes: [r.point()?, r.point()?, r.point()?],
            normal: r.point()?,
            reach: r.f64()?,
        },
        t => return Err(LabError::CacheFormat(format!("unknown chart kind {t}"))),
    };
    let mut bounds = [(0.0, 0.0); 3];
    for b in &mut bounds {
        *b = (r.f64()?, r.f64()?);
    }
    let mut periodic = [false; 3];
    for p in &mut periodic {
        *p = r.u8()? != 0;
    }
    let mut periodic_offset = [0.0; 3];
    for o in &mut periodic_offset {
        *o = r.f64()?;
    }
    let mut counts = [0usize; 3];
    for n in &mut counts {
        *n = r.u32()? as usize;
    }
    Ok(Chart {
        name,
        kind,
        bounds,
        periodic,
        periodic_offset,
        counts,
        flipped: r.u8()? != 0,
    })
}

/// Serializes a mesh, trailer included.
pub fn encode_mesh(m: &BoundaryMesh) -> Vec<u8> {
    let mut w = Writer(Vec::with_capacity(m.len() * 320 + 1024));
    w.0.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);
    w.u32(ATLAS_VERSION);
    w.str(&m.domain_id);
    w.u32(m.resolution as u32);
    w.u8(m.quadrature.tag());
    w.f64(m.model_radius);
    w.u32(m.charts.len() as u32);
    m.charts.iter().for_each(|c| write_chart(&mut w, c));
    w.u64(m.len() as u64);
    w.u64(m.normalization_faults as u64);
    m.nodes.iter().for_each(|p| w.point(p));
    m.frames.iter().flatten().for_each(|p| w.point(p));
    m.patch_ids.iter().for_each(|&p| w.u32(p));
    m.param_coords.iter().flatten().for_each(|&x| w.f64(x));
    m.param_weights.iter().for_each(|&x| w.f64(x));
    m.gradients.iter().flatten().for_each(|&z| w.c64(z));
    m.normals.iter().flatten().for_each(|&x| w.f64(x));
    m.cell_diameters.iter().for_each(|&x| w.f64(x));
    m.orientation.iter().for_each(|&o| w.u8(o as u8));
    m.sigma_weights.iter().for_each(|&x| w.f64(x));
    m.lambda_weights.iter().for_each(|&x| w.f64(x));
    m.cl_weights.iter().for_each(|&z| w.c64(z));
    let digest = Sha256::digest(&w.0);
    w.0.extend_from_slice(&digest);
    w.0
}

fn read_vec<T>(n: usize, mut f: impl FnMut() -> Result<T>) -> Result<Vec<T>> {
    (0..n).map(|_| f()).collect()
}

pub fn decode_mesh(buf: &[u8]) -> Result<BoundaryMesh> {
    if buf.len() < MAGIC.len() + 8 + 32 {
        return Err(LabError::CacheFormat("file too short".into()));
    }
    let (body, trailer) = buf.split_at(buf.len() - 32);
    if Sha256::digest(body).as_slice() != trailer {
        return Err(LabError::CacheFormat("checksum mismatch".into()));
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(LabError::CacheFormat("bad magic".into()));
    }
    let format = r.u32()?;
    if format != FORMAT_VERSION {
        return Err(LabError::CacheFormat(format!("format version {format}")));
    }
    let atlas = r.u32()?;
    if atlas != ATLAS_VERSION {
        return Err(LabError::CacheFormat(format!("atlas version {atlas}")));
    }
    let domain_id = r.str()?;
    let resolution = r.u32()? as usize;
    let quadrature = QuadratureRule::from_tag(r.u8()?)
        .ok_or_else(|| LabError::CacheFormat("unknown quadrature rule".into()))?;
    let model_radius = r.f64()?;
    let nc = r.u32()? as usize;
    let charts = read_vec(nc, || read_chart(&mut r))?;
    let n = r.u64()? as usize;
    let normalization_faults = r.u64()? as usize;
    if n.checked_mul(NODE_BYTES).is_none_or(|b| b > body.len()) {
        return Err(LabError::CacheFormat(
            "node count inconsistent with file size".into(),
        ));
    }
    let nodes = read_vec(n, || r.point())?;
    let frames = read_vec(n, || Ok([r.point()?, r.point()?, r.point()?]))?;
    let patch_ids = read_vec(n, || r.u32())?;
    let param_coords = read_vec(n, || Ok([r.f64()?, r.f64()?, r.f64()?]))?;
    let param_weights = read_vec(n, || r.f64())?;
    let gradients = read_vec(n, || Ok([r.c64()?, r.c64()?]))?;
    let normals = read_vec(n, || Ok([r.f64()?, r.f64()?, r.f64()?, r.f64()?]))?;
    let cell_diameters = read_vec(n, || r.f64())?;
    let orientation = read_vec(n, || Ok(r.u8()? as i8))?;
    let sigma_weights = read_vec(n, || r.f64())?;
    let lambda_weights = read_vec(n, || r.f64())?;
    let cl_weights = read_vec(n, || r.c64())?;
    if r.pos != body.len() {
        return Err(LabError::CacheFormat("trailing bytes".into()));
    }
    Ok(BoundaryMesh {
        domain_id,
        resolution,
        quadrature,
        model_radius,
        charts,
        nodes,
        frames,
        patch_ids,
        param_coords,
        param_weights,
        gradients,
        normals,
        cell_diameters,
        orientation,
        sigma_weights,
        lambda_weights,
        cl_weights,
        normalization_faults,
    })
}

/// Hex SHA-256 of the encoded mesh; identifies a mesh in reports.
pub fn mesh_checksum(m: &BoundaryMesh) -> String {
    let bytes = encode_mesh(m);
    hex::encode(&bytes[bytes.len() - 32..])
}

pub fn cache_file_name(domain_id: &str, opts: &MeshOptions, model: bool) -> String {
    let id: String = domain_id
        .chars()
        .map(|ch| {
            if ch.is_ascii_alphanumeric() || ch == '.' {
                ch
            } else {
                '_'
            }
        })
        .collect();
    let rule = match opts.quadrature {
        QuadratureRule::Midpoint => "mid",
        QuadratureRule::GaussLegendre => "gl",
    };
    let radius = if model {
        format!("-R{}", opts.model_radius)
    } else {
        String::new()
    };
    format!(
        "{id}-a{ATLAS_VERSION}-n{}-{rule}{radius}.mesh",
        opts.resolution
    )
}

pub fn cache_path(dir: &Path, d: &DomainSpec, opts: &MeshOptions) -> PathBuf {
    let model = matches!(d.kind(), DomainKind::Model(_));
    dir.join(cache_file_name(d.id(), opts, model))
}

/// Loads the mesh from `dir` if a valid cache file exists, otherwise builds
/// and stores it. A corrupt or stale file is rebuilt and overwritten.
pub fn load_or_build(
    d: &DomainSpec,
    opts: &MeshOptions,
    exec: Exec,
    dir: Option<&Path>,
) -> Result<BoundaryMesh> {
    let Some(dir) = dir else {
        return parametrize(d, opts, exec);
    };
    let path = cache_path(dir, d, opts);
    if let Ok(bytes) = std::fs::read(&path) {
        match decode_mesh(&bytes) {
            Ok(m)
                if m.domain_id == d.id()
                    && m.resolution == opts.resolution
                    && m.quadrature == opts.quadrature =>
            {
                return Ok(m)
            }
            Ok(_) => log::warn!(
                "cache file {} has a different key; rebuilding",
                path.display()
            ),
            Err(e) => log::warn!("ignoring cache file {}: {e}", path.display()),
        }
    }
    let mesh = parametrize(d, opts, exec)?;
    std::fs::create_dir_all(dir)?;
    let tmp = path.with_extension("mesh.tmp");
    std::fs::write(&tmp, encode_mesh(&mesh))?;
    std::fs::rename(&tmp, &path)?;
    Ok(mesh)
}
