//! Dense least squares by Householder QR with column pivoting.

/// Row-major `rows × cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Builds a reflector `H = I - beta v v^T` with `H x = alpha e_1`, writing
/// `v` (with `v[0] = 1`) into `x`. Returns `(alpha, beta)`.
fn householder(x: &mut [f64]) -> (f64, f64) {
    let sigma = norm(x);
    if sigma == 0.0 {
        return (0.0, 0.0);
    }
    let alpha = if x[0] > 0.0 { -sigma } else { sigma };
    let v0 = x[0] - alpha;
    for v in x.iter_mut().skip(1) {
        *v /= v0;
    }
    x[0] = 1.0;
    let beta = -v0 / alpha;
    (alpha, beta)
}

fn apply_reflector(v: &[f64], beta: f64, y: &mut [f64]) {
    let s = beta * dot(v, y);
    for (yi, vi) in y.iter_mut().zip(v) {
        *yi -= s * vi;
    }
}

/// Minimum-norm solution of `min ||A x - b||`.
///
/// Column-pivoted QR finds the numerical rank `r` (|R_kk| > 1e-10·|R_00|);
/// when `r < n` the trailing columns of `R` are
/// eliminated by a second set of reflectors from the right (a complete
/// orthogonal decomposition) so the returned `x` has the smallest norm.
pub fn lstsq(a: &Matrix, b: &[f64]) -> (Vec<f64>, usize) {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(b.len(), m);
    if n == 0 {
        return (Vec::new(), 0);
    }
    // column-major working copy
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a.get(i, j)).collect()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rhs = b.to_vec();
    let mut col_norms: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
    let steps = m.min(n);
    let mut diag = vec![0.0; steps];
    let mut rank = 0;
    let tol = 1e-10;
    for k in 0..steps {
        let p = (k..n).max_by(|&i, &j| col_norms[i].total_cmp(&col_norms[j])).unwrap();
        cols.swap(k, p);
        col_norms.swap(k, p);
        perm.swap(k, p);
        let (alpha, beta) = householder(&mut cols[k][k..]);
        diag[k] = alpha;
        if k == 0 && alpha == 0.0 {
            break;
        }
        if alpha.abs() <= tol * diag[0].abs() {
            break;
        }
        rank += 1;
        let (head, tail) = cols.split_at_mut(k + 1);
        let v = &head[k][k..];
        for c in tail.iter_mut() {
            apply_reflector(v, beta, &mut c[k..]);
        }
        apply_reflector(v, beta, &mut rhs[k..]);
        for (j, c) in tail.iter().enumerate() {
            // recompute rather than downdate, cheap at these sizes
            col_norms[k + 1 + j] = dot(&c[k + 1..], &c[k + 1..]);
        }
    }
    if rank == 0 {
        return (vec![0.0; n], 0);
    }
    // R is rank × n upper trapezoid: r[i][j] for j >= i
    let mut r = vec![vec![0.0; n]; rank];
    for i in 0..rank {
        r[i][i] = diag[i];
        for j in i + 1..n {
            r[i][j] = cols[j][i];
        }
    }
    let qtb = &rhs[..rank];
    let z = if rank == n {
        back_substitute(&r, qtb)
    } else {
        // Right-side reflectors turn [R11 R12] into [T 0], T upper-triangular.
        // Row i is reduced over columns {i} ∪ rank..n.
        let mut reflectors = Vec::with_capacity(rank);
        for i in (0..rank).rev() {
            let mut x: Vec<f64> = std::iter::once(r[i][i]).chain(r[i][rank..].iter().copied()).collect();
            let (alpha, beta) = householder(&mut x);
            for row in r.iter_mut().take(i + 1) {
                let mut y: Vec<f64> = std::iter::once(row[i]).chain(row[rank..].iter().copied()).collect();
                apply_reflector(&x, beta, &mut y);
                row[i] = y[0];
                row[rank..].copy_from_slice(&y[1..]);
            }
            r[i][i] = alpha;
            for v in r[i][rank..].iter_mut() {
                *v = 0.0;
            }
            reflectors.push((i, x, beta));
        }
        // solve T w = Q^T b where T is upper triangular in the first rank columns
        let w = back_substitute(&r, qtb);
        let mut z = vec![0.0; n];
        z[..rank].copy_from_slice(&w);
        for (i, v, beta) in reflectors.into_iter().rev() {
            let mut y: Vec<f64> = std::iter::once(z[i]).chain(z[rank..].iter().copied()).collect();
            apply_reflector(&v, beta, &mut y);
            z[i] = y[0];
            z[rank..].copy_from_slice(&y[1..]);
        }
        z
    };
    let mut x = vec![0.0; n];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = z[k];
    }
    (x, rank)
}

/// Solves the leading `k × k` upper-triangular block of `r` against `b`.
fn back_substitute(r: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = b.len();
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| r[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / r[i][i];
    }
    x
}
