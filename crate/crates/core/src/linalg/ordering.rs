use crate::linalg::SparseSymmetric;
use crate::scalar::Real;

/// Approximate-minimum-degree ordering of a symmetric pattern.
///
/// Returns the elimination order (`order[k]` is the k-th pivot candidate).
pub fn amd_order<T: Real>(m: &SparseSymmetric<T>) -> Vec<usize> {
    let n = m.dim;
    if n == 0 {
        return Vec::new();
    }
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        cols[j].push(j);
        for (i, _) in m.col(j) {
            cols[j].push(i);
            if i != j {
                cols[i].push(j);
            }
        }
    }
    let mut ap = Vec::with_capacity(n + 1);
    let mut ai = Vec::new();
    ap.push(0usize);
    for c in cols.iter_mut() {
        c.sort_unstable();
        c.dedup();
        ai.extend_from_slice(c);
        ap.push(ai.len());
    }
    match amd::order(n, &ap, &ai, &amd::Control::default()) {
        Ok((perm, _, _)) => perm,
        Err(status) => {
            log::warn!("AMD ordering failed ({status:?}); using natural order");
            (0..n).collect()
        }
    }
}

/// Caches an ordering for as long as the sparsity pattern is unchanged.
#[derive(Debug, Clone, Default)]
pub struct OrderingCache {
    colptr: Vec<usize>,
    rowval: Vec<usize>,
    order: Vec<usize>,
    computed: usize,
}

impl OrderingCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn order_for<T: Real>(&mut self, m: &SparseSymmetric<T>) -> &[usize] {
        let hit = self.computed > 0
            && self.order.len() == m.dim
            && self.colptr == m.colptr
            && self.rowval == m.rowval;
        if !hit {
            self.colptr = m.colptr.clone();
            self.rowval = m.rowval.clone();
            self.order = amd_order(m);
            self.computed += 1;
        }
        &self.order
    }

    /// Number of orderings computed so far.
    pub fn symbolic_count(&self) -> usize {
        self.computed
    }
}
