//! JSON file formats for meshes, CPWL functions, lattice forms and networks, and CSV
//! helpers for point sets and values.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cpwl::{AffineFunc, CpwlPieces, LatticeForm};
use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, HalfSpace};
use crate::mesh::SimplicialMesh;
use crate::net::{AffineLayer, ReluNetwork};

pub const MESH_SCHEMA: &str = "mesh/1";
pub const CPWL_SCHEMA: &str = "cpwl/1";
pub const LATTICE_SCHEMA: &str = "lattice/1";
pub const NETWORK_SCHEMA: &str = "network/1";
pub const REPORT_SCHEMA: &str = "report/1";

/// Layers with more entries than this are written in sparse form.
pub const DENSE_LIMIT: usize = 4096;

pub fn schema_versions() -> Vec<(&'static str, &'static str)> {
    vec![
        ("mesh", MESH_SCHEMA),
        ("cpwl", CPWL_SCHEMA),
        ("lattice", LATTICE_SCHEMA),
        ("network", NETWORK_SCHEMA),
        ("report", REPORT_SCHEMA),
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshFile {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub simplices: Vec<Vec<usize>>,
    /// Indices of boundary vertices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<usize>>,
}

impl MeshFile {
    pub fn from_mesh(m: &SimplicialMesh) -> Self {
        Self {
            dim: m.dim(),
            vertices: m.vertices().to_vec(),
            simplices: m.simplices().to_vec(),
            boundary: Some(
                m.boundary()
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &b)| b.then_some(i))
                    .collect(),
            ),
        }
    }

    pub fn into_mesh(self) -> Result<SimplicialMesh> {
        let n = self.vertices.len();
        let boundary = match self.boundary {
            Some(idx) => {
                let mut b = vec![false; n];
                for i in idx {
                    *b.get_mut(i).ok_or(crate::mesh::MeshError::NoSuchVertex(i))? = true;
                }
                Some(b)
            }
            None => None,
        };
        Ok(SimplicialMesh::new(self.dim, self.vertices, self.simplices, boundary, true)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CpwlFile {
    pub dim: usize,
    pub pieces: Vec<AffineFunc>,
    pub regions: Vec<Vec<HalfSpace>>,
    /// Piece index active on each region; defaults to the region index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_pieces: Option<Vec<usize>>,
    /// `[lo, hi]` corners of the domain box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_box: Option<[Vec<f64>; 2]>,
}

impl CpwlFile {
    pub fn from_cpwl(f: &CpwlPieces) -> Self {
        Self {
            dim: f.dim(),
            pieces: f.pieces().to_vec(),
            regions: f.regions().to_vec(),
            region_pieces: Some(f.region_pieces().to_vec()),
            domain_box: f.domain().map(|b| [b.lo.clone(), b.hi.clone()]),
        }
    }

    pub fn into_cpwl(self) -> Result<CpwlPieces> {
        let domain = self.domain_box.map(|[lo, hi]| BoundingBox::new(lo, hi));
        Ok(CpwlPieces::new(self.dim, self.pieces, self.regions, self.region_pieces, domain)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerFile {
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<Vec<f64>>>,
    /// Row-wise `(column, value)` lists.
    #[serde(rename = "W_sparse", default, skip_serializing_if = "Option::is_none")]
    pub w_sparse: Option<Vec<Vec<(usize, f64)>>>,
    /// Input width, required with `W_sparse`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_dim: Option<usize>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkFile {
    pub input_dim: usize,
    pub layers: Vec<LayerFile>,
}

impl NetworkFile {
    pub fn from_network(net: &ReluNetwork) -> Self {
        let layers = net
            .layers()
            .iter()
            .map(|l| {
                if l.in_dim * l.out_dim <= DENSE_LIMIT {
                    LayerFile {
                        w: Some(l.to_dense()),
                        w_sparse: None,
                        in_dim: None,
                        b: l.bias.clone(),
                    }
                } else {
                    LayerFile {
                        w: None,
                        w_sparse: Some(l.rows.clone()),
                        in_dim: Some(l.in_dim),
                        b: l.bias.clone(),
                    }
                }
            })
            .collect();
        Self {
            input_dim: net.input_dim(),
            layers,
        }
    }

    pub fn into_network(self) -> Result<ReluNetwork> {
        let mut in_dim = self.input_dim;
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.into_iter().enumerate() {
            let layer = match (l.w, l.w_sparse) {
                (Some(w), None) => AffineLayer::from_dense(&w, l.b, in_dim)?,
                (None, Some(rows)) => AffineLayer::new(l.in_dim.unwrap_or(in_dim), rows, l.b)?,
                _ => return Err(Error::Parse(format!("layer {i} needs exactly one of W and W_sparse"))),
            };
            in_dim = layer.out_dim;
            layers.push(layer);
        }
        Ok(ReluNetwork::new(self.input_dim, layers)?)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

pub fn load_mesh(path: &Path) -> Result<SimplicialMesh> {
    read_json::<MeshFile>(path)?.into_mesh()
}

pub fn save_mesh(path: &Path, m: &SimplicialMesh) -> Result<()> {
    write_json(path, &MeshFile::from_mesh(m))
}

pub fn load_cpwl(path: &Path) -> Result<CpwlPieces> {
    read_json::<CpwlFile>(path)?.into_cpwl()
}

pub fn save_cpwl(path: &Path, f: &CpwlPieces) -> Result<()> {
    write_json(path, &CpwlFile::from_cpwl(f))
}

pub fn load_lattice(path: &Path) -> Result<LatticeForm> {
    let l: LatticeForm = read_json(path)?;
    Ok(LatticeForm::new(l.pieces, l.clauses)?)
}

pub fn save_lattice(path: &Path, l: &LatticeForm) -> Result<()> {
    write_json(path, l)
}

pub fn network_from_json(text: &str) -> Result<ReluNetwork> {
    serde_json::from_str::<NetworkFile>(text)?.into_network()
}

pub fn network_to_json(net: &ReluNetwork) -> Result<String> {
    Ok(serde_json::to_string(&NetworkFile::from_network(net))?)
}

pub fn load_network(path: &Path) -> Result<ReluNetwork> {
    read_json::<NetworkFile>(path)?.into_network()
}

pub fn save_network(path: &Path, net: &ReluNetwork) -> Result<()> {
    write_json(path, &NetworkFile::from_network(net))
}

/// Rows of comma or whitespace separated numbers; blank lines and `#` comments are skipped.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect();
        match row {
            Ok(r) => out.push(r),
            // a header line
            Err(_) if out.is_empty() && n == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("line {}: {e}", n + 1))),
        }
    }
    Ok(out)
}

pub fn load_points(path: &Path, dim: usize) -> Result<Vec<Vec<f64>>> {
    let rows = parse_rows(&fs::read_to_string(path)?)?;
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
        return Err(Error::Parse(format!("point {i} has {} coordinates, expected {dim}", r.len())));
    }
    Ok(rows)
}

/// All numbers in the file, in order.
pub fn load_values(path: &Path) -> Result<Vec<f64>> {
    Ok(parse_rows(&fs::read_to_string(path)?)?.into_iter().flatten().collect())
}

pub fn values_to_csv(values: &[f64]) -> String {
    let mut s = String::new();
    for v in values {
        s.push_str(&format!("{v:?}\n"));
    }
    s
}

pub fn rows_to_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}
