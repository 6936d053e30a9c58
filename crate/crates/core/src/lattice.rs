//! The projection lattice `P(B(Cⁿ))` ordered by range inclusion.

use crate::error::{Error, Result};
use crate::numeric::{max_norm, orthonormal_range, same_dim, CMatrix, Projection};
use crate::tolerance::ToleranceConfig;

/// `p ≤ q` iff `‖p − qp‖ ≤ eps_proj`, i.e. `range(p) ⊆ range(q)`.
pub fn proj_leq(p: &Projection, q: &Projection, tol: &ToleranceConfig) -> Result<bool> {
    same_dim(p.dim(), q.dim())?;
    Ok(leq_residual(p, q) <= tol.eps_proj)
}

pub(crate) fn leq_residual(p: &Projection, q: &Projection) -> f64 {
    if p.rank() == 0 {
        return 0.0;
    }
    max_norm(&(p.matrix() - q.matrix() * p.matrix()))
}

fn check_family(ps: &[Projection]) -> Result<usize> {
    let n = ps.first().ok_or(Error::Empty("projection list"))?.dim();
    for p in ps {
        same_dim(n, p.dim())?;
    }
    Ok(n)
}

/// Projection onto the intersection of the ranges.
pub fn proj_meet(ps: &[Projection], tol: &ToleranceConfig) -> Result<Projection> {
    check_family(ps)?;
    let mut acc = ps[0].clone();
    for q in &ps[1..] {
        acc = meet2(&acc, q, tol);
        if acc.rank() == 0 {
            break;
        }
    }
    Ok(acc)
}

fn meet2(p: &Projection, q: &Projection, tol: &ToleranceConfig) -> Projection {
    let n = p.dim();
    if p.rank() == 0 || q.rank() == 0 {
        return Projection::zero(n);
    }
    if q.rank() == n {
        return p.clone();
    }
    if p.rank() == n {
        return q.clone();
    }
    // p ∧ q = 1 − ((1 − p) ∨ (1 − q))
    let mut stacked = CMatrix::zeros(n, 2 * n - p.rank() - q.rank());
    stacked
        .columns_mut(0, n - p.rank())
        .copy_from(p.complement().basis());
    stacked
        .columns_mut(n - p.rank(), n - q.rank())
        .copy_from(q.complement().basis());
    orthonormal_range(&stacked, tol)
        .expect("positive dimension")
        .complement()
}

/// Projection onto the span of the union of the ranges.
pub fn proj_join(ps: &[Projection], tol: &ToleranceConfig) -> Result<Projection> {
    let n = check_family(ps)?;
    let total: usize = ps.iter().map(Projection::rank).sum();
    if let Some(full) = ps.iter().find(|p| p.rank() == n) {
        return Ok(full.clone());
    }
    if ps.len() == 1 {
        return Ok(ps[0].clone());
    }
    let mut stacked = CMatrix::zeros(n, total);
    let mut col = 0;
    for p in ps {
        let r = p.rank();
        stacked.columns_mut(col, r).copy_from(p.basis());
        col += r;
    }
    orthonormal_range(&stacked, tol)
}

/// `1 − p`.
pub fn proj_complement(p: &Projection) -> Projection {
    p.complement()
}

/// Nonzero with no nonzero proper subprojection; in a matrix factor this is
/// rank one.
pub fn is_atomic(p: &Projection) -> bool {
    p.rank() == 1
}
