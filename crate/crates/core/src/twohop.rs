//! Normalized two-hop matrices, leave-one-column-out variants via rank
//! corrections, and the sup-norm row distances built on them.
//!
//! Path counts are held as integers until the final division so the
//! correction identity `counts^(−j)_{iℓ} + A_ij·A_jℓ = counts_{iℓ}` stays
//! exact. The f64 views are kept alongside because the distance loops read
//! each entry up to n times.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphon::Adjacency;

/// M = A²/n with the underlying integer path counts.
#[derive(Debug, Clone)]
pub struct TwoHop {
    n: usize,
    counts: Vec<u32>,
    m: Vec<f64>,
}

/// M^(−j) = (A^(−j))²/(n−1), materialized with original indices retained.
/// Entries on row or column j are stored as zero and must not be read.
#[derive(Debug, Clone)]
pub struct LooTwoHop {
    n: usize,
    j: usize,
    counts: Vec<u32>,
    m: Vec<f64>,
}

/// Exact two-hop path counts divided by n.
pub fn full_twohop(a: &Adjacency) -> TwoHop {
    let n = a.n();
    let mut counts = vec![0u32; n * n];
    counts
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row_out)| {
            let row_i = a.row(i);
            for (m_idx, &edge) in row_i.iter().enumerate() {
                if edge == 1 {
                    for (acc, &v) in row_out.iter_mut().zip(a.row(m_idx)) {
                        *acc += v as u32;
                    }
                }
            }
        });
    let inv = 1.0 / n as f64;
    let m = counts.iter().map(|&c| c as f64 * inv).collect();
    TwoHop { n, counts, m }
}

impl TwoHop {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Integer path count (A²)_{iℓ}.
    #[inline]
    pub fn count(&self, i: usize, l: usize) -> u32 {
        self.counts[i * self.n + l]
    }

    /// M_{iℓ} = (A²)_{iℓ}/n.
    #[inline]
    pub fn value(&self, i: usize, l: usize) -> f64 {
        self.m[i * self.n + l]
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.m[i * self.n..(i + 1) * self.n]
    }
}

/// Materializes M^(−j) from M by the rank correction
/// (A^(−j))²_{iℓ} = (A²)_{iℓ} − A_ij·A_jℓ. Cost O(n²); never re-squares.
pub fn loo_twohop(a: &Adjacency, m: &TwoHop, j: usize) -> LooTwoHop {
    let n = a.n();
    assert!(j < n, "deleted node {j} out of range");
    let mut counts = vec![0u32; n * n];
    let mut values = vec![0.0f64; n * n];
    let inv = 1.0 / (n - 1) as f64;
    let row_j = a.row(j);
    for i in 0..n {
        if i == j {
            continue;
        }
        let base = &m.counts[i * n..(i + 1) * n];
        let out_c = &mut counts[i * n..(i + 1) * n];
        let out_v = &mut values[i * n..(i + 1) * n];
        if a.is_edge(i, j) {
            for (l, (&b, &aj)) in base.iter().zip(row_j).enumerate() {
                let c = b - aj as u32;
                out_c[l] = c;
                out_v[l] = c as f64 * inv;
            }
        } else {
            out_c.copy_from_slice(base);
            for (v, &b) in out_v.iter_mut().zip(base) {
                *v = b as f64 * inv;
            }
        }
        out_c[j] = 0;
        out_v[j] = 0.0;
    }
    LooTwoHop {
        n,
        j,
        counts,
        m: values,
    }
}

impl LooTwoHop {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The deleted node.
    pub fn deleted(&self) -> usize {
        self.j
    }

    /// Integer path count ((A^(−j))²)_{iℓ} for i, ℓ ≠ j.
    #[inline]
    pub fn count(&self, i: usize, l: usize) -> u32 {
        debug_assert!(i != self.j && l != self.j);
        self.counts[i * self.n + l]
    }

    /// M^(−j)_{iℓ} for i, ℓ ≠ j.
    #[inline]
    pub fn value(&self, i: usize, l: usize) -> f64 {
        debug_assert!(i != self.j && l != self.j);
        self.m[i * self.n + l]
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.m[i * self.n..(i + 1) * self.n]
    }

    /// Fills `out[k] = d^(−j)(i, k)` for every candidate k; entries at i and
    /// at the deleted node are set to +∞ so selections can never pick them.
    pub fn distance_row(&self, i: usize, out: &mut [f64]) {
        assert_eq!(out.len(), self.n);
        assert!(i < self.n && i != self.j);
        let row_i = self.row(i);
        for (k, slot) in out.iter_mut().enumerate() {
            if k == i || k == self.j {
                *slot = f64::INFINITY;
            } else {
                *slot = max_abs_diff_excluding(row_i, self.row(k), [i, k, self.j]);
            }
        }
    }

    /// Full symmetric distance matrix (row-major n×n into `out`); entries
    /// involving the anchor itself or the deleted node get +∞. Each (i,k)
    /// pair is computed once and mirrored.
    pub fn distance_matrix(&self, out: &mut [f64]) {
        let n = self.n;
        assert_eq!(out.len(), n * n);
        out.fill(f64::INFINITY);
        for i in 0..n {
            if i == self.j {
                continue;
            }
            let row_i = self.row(i);
            for k in (i + 1)..n {
                if k == self.j {
                    continue;
                }
                let d = max_abs_diff_excluding(row_i, self.row(k), [i, k, self.j]);
                out[i * n + k] = d;
                out[k * n + i] = d;
            }
        }
    }
}

/// LOO distance d^(−j)(i, k) = max_{ℓ ∉ {i,k,j}} |M^(−j)_{iℓ} − M^(−j)_{kℓ}|.
pub fn loo_distance(view: &LooTwoHop, i: usize, k: usize) -> Result<f64> {
    let j = view.j;
    if i == k || i == j || k == j {
        return Err(Error::argument(format!(
            "loo distance needs pairwise distinct (i={i}, k={k}, j={j})"
        )));
    }
    if i >= view.n || k >= view.n {
        return Err(Error::argument(format!(
            "node index out of range (i={i}, k={k}, n={})",
            view.n
        )));
    }
    Ok(max_abs_diff_excluding(view.row(i), view.row(k), [i, k, j]))
}

/// Classical distance: 0 when i = k, otherwise
/// max_{ℓ ∉ {i,k}} |M_{iℓ} − M_{kℓ}| on the full two-hop matrix.
pub fn classical_distance(m: &TwoHop, i: usize, k: usize) -> f64 {
    if i == k {
        return 0.0;
    }
    max_abs_diff_excluding(m.row(i), m.row(k), [i, k, k])
}

/// Fills `out[k] = d(i, k)` for the classical distance, with +∞ at k = i.
pub(crate) fn classical_distance_row(m: &TwoHop, i: usize, out: &mut [f64]) {
    assert_eq!(out.len(), m.n);
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = if k == i {
            f64::INFINITY
        } else {
            classical_distance(m, i, k)
        };
    }
}

/// max |x[ℓ] − y[ℓ]| over ℓ outside the (possibly repeated) excluded indices.
fn max_abs_diff_excluding(x: &[f64], y: &[f64], mut excl: [usize; 3]) -> f64 {
    excl.sort_unstable();
    let [a, b, c] = excl;
    let n = x.len();
    let mut m = seg_max_abs_diff(&x[0..a], &y[0..a]);
    if b > a + 1 {
        m = m.max(seg_max_abs_diff(&x[a + 1..b], &y[a + 1..b]));
    }
    if c > b + 1 {
        m = m.max(seg_max_abs_diff(&x[b + 1..c], &y[b + 1..c]));
    }
    if c + 1 < n {
        m = m.max(seg_max_abs_diff(&x[c + 1..], &y[c + 1..]));
    }
    m
}

/// Four independent max chains so the reduction is not one long
/// latency-bound dependency.
#[inline]
fn seg_max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut cx = x.chunks_exact(4);
    let mut cy = y.chunks_exact(4);
    for (a, b) in (&mut cx).zip(&mut cy) {
        acc[0] = acc[0].max((a[0] - b[0]).abs());
        acc[1] = acc[1].max((a[1] - b[1]).abs());
        acc[2] = acc[2].max((a[2] - b[2]).abs());
        acc[3] = acc[3].max((a[3] - b[3]).abs());
    }
    let mut tail = 0.0f64;
    for (a, b) in cx.remainder().iter().zip(cy.remainder()) {
        tail = tail.max((a - b).abs());
    }
    acc[0].max(acc[1]).max(acc[2].max(acc[3])).max(tail)
}
