use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use super::fields::{point_curvature, stencil_at};
use super::{GeometryError, GraphState};
use crate::scalar::Real;
use crate::symfun::{format_function, CurvatureSpec};

/// Per-interior-node scalars kept with each snapshot, aligned with
/// `grid.interior()`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FieldSummary<T> {
    pub v: Vec<T>,
    pub lam_min: Vec<T>,
    pub lam_max: Vec<T>,
    #[serde(rename = "F")]
    pub f: Vec<T>,
}

impl<T: Real> FieldSummary<T> {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn max_v(&self) -> T {
        self.v.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min_lambda_min(&self) -> T {
        self.lam_min.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_f(&self) -> T {
        self.f.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// Gradient function, extreme principal curvatures and `F` at every interior
/// node. Errors like `geom_fields` below `lambda_floor`.
pub fn field_summary<T: Real>(
    state: &GraphState<T>,
    spec: &CurvatureSpec<T>,
    lambda_floor: T,
) -> Result<FieldSummary<T>, GeometryError> {
    let grid = &state.grid;
    let n = grid.n();
    let rows: Vec<Result<[T; 4], GeometryError>> = grid
        .interior()
        .par_iter()
        .map(|&k| {
            let pc = point_curvature(n, &stencil_at(state, k));
            if !(pc.lam[0] >= lambda_floor) || pc.lam[0] <= T::zero() {
                return Err(GeometryError::NonConvexState {
                    node: k,
                    x: grid.coords(k).map(|c| c.to_f64_lossy()),
                    lambda_min: pc.lam[0].to_f64_lossy(),
                    t: state.t.to_f64_lossy(),
                });
            }
            let f = spec.function.value(&pc.lam[..n]);
            Ok([pc.v, pc.lam[0], pc.lam[1], f])
        })
        .collect();
    let mut out = FieldSummary {
        v: Vec::with_capacity(rows.len()),
        lam_min: Vec::with_capacity(rows.len()),
        lam_max: Vec::with_capacity(rows.len()),
        f: Vec::with_capacity(rows.len()),
    };
    for row in rows {
        let [v, lo, hi, f] = row?;
        out.v.push(v);
        out.lam_min.push(lo);
        out.lam_max.push(hi);
        out.f.push(f);
    }
    Ok(out)
}

/// Metadata written next to a snapshot table.
#[derive(Clone, Debug, Serialize)]
pub struct SnapshotHeader {
    pub n: usize,
    pub spacing: f64,
    pub origin: [f64; 2],
    pub shape: [usize; 2],
    pub interior_nodes: usize,
    pub t: f64,
    pub function: String,
    pub beta: f64,
}

impl SnapshotHeader {
    pub fn new<T: Real>(state: &GraphState<T>, spec: &CurvatureSpec<T>) -> Self {
        let g = &state.grid;
        Self {
            n: g.n(),
            spacing: g.spacing().to_f64_lossy(),
            origin: g.origin().map(|c| c.to_f64_lossy()),
            shape: g.shape(),
            interior_nodes: g.interior().len(),
            t: state.t.to_f64_lossy(),
            function: format_function(&spec.function),
            beta: spec.beta.to_f64_lossy(),
        }
    }
}

pub const SNAPSHOT_COLUMNS: &str = "i,j,x1,x2,w,v,lambda_min,lambda_max,F";

/// One row per interior node: `i,j,x1,x2,w,v,lambda_min,lambda_max,F`.
pub fn write_snapshot_csv<T: Real, W: Write>(
    out: &mut W,
    state: &GraphState<T>,
    fields: &FieldSummary<T>,
) -> io::Result<()> {
    writeln!(out, "{SNAPSHOT_COLUMNS}")?;
    let g = &state.grid;
    for (slot, &k) in g.interior().iter().enumerate() {
        let (i, j) = g.ij(k);
        let [x1, x2] = g.coords(k);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            i, j, x1, x2, state.w[k], fields.v[slot], fields.lam_min[slot], fields.lam_max[slot], fields.f[slot]
        )?;
    }
    Ok(())
}
