//! Symmetric tridiagonal eigenproblems: Sturm counts, bisection, inverse
//! iteration, and a pivoted LU used for shifted solves.

/// Relative width at which bisection stops.
const BISECT_REL: f64 = 1e-14;
/// Vectors whose eigenvalues are closer than this fraction of the matrix norm
/// are explicitly reorthogonalized.
const CLUSTER_REL: f64 = 1e-7;
const INVERSE_STEPS: usize = 4;

#[derive(Debug, Clone, Copy)]
pub struct SymTridiag<'a> {
    pub diag: &'a [f64],
    pub off: &'a [f64],
}

impl<'a> SymTridiag<'a> {
    pub fn new(diag: &'a [f64], off: &'a [f64]) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "offdiagonal must have n-1 entries");
        SymTridiag { diag, off }
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        (0..self.order())
            .map(|i| {
                let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let r = if i < self.off.len() { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + l + r
            })
            .fold(0.0, f64::max)
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.order() {
            let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let r = if i < self.off.len() { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - l - r);
            hi = hi.max(self.diag[i] + l + r);
        }
        let pad = f64::EPSILON * self.norm().max(1.0) * 4.0;
        (lo - pad, hi + pad)
    }

    /// Number of eigenvalues strictly below `x` (LDL^T pivot signs).
    pub fn sturm_count(&self, x: f64) -> usize {
        let guard = f64::EPSILON * self.norm().max(f64::MIN_POSITIVE);
        self.sturm_count_guarded(x, guard)
    }

    fn sturm_count_guarded(&self, x: f64, guard: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.order() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / q };
            q = self.diag[i] - x - coupling;
            if q.abs() < guard {
                q = -guard;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th eigenvalue (0-based, ascending).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (lo, hi) = self.gershgorin();
        self.bisect(k, lo, hi)
    }

    /// Bisection for eigenvalue `k` given `count(lo) <= k < count(hi)`.
    /// Returns the lower end of the final bracket, so `sturm_count` there is `k`.
    fn bisect(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        let guard = f64::EPSILON * self.norm().max(f64::MIN_POSITIVE);
        for _ in 0..4096 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= BISECT_REL * lo.abs().max(hi.abs()) {
                break;
            }
            if self.sturm_count_guarded(mid, guard) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Eigenvalues with indices in `range`, ascending.
    pub fn eigenvalues(&self, range: std::ops::Range<usize>) -> Vec<f64> {
        let (mut lo, hi) = self.gershgorin();
        range
            .map(|k| {
                let e = self.bisect(k, lo, hi);
                lo = e;
                e
            })
            .collect()
    }

    /// Eigenvectors (unit Euclidean norm) for the given ascending eigenvalues.
    pub fn eigenvectors(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let n = self.order();
        let tol = CLUSTER_REL * self.norm();
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        for (j, &lambda) in values.iter().enumerate() {
            let lu = TridiagLu::factor(self.diag, self.off, lambda);
            let mut v = start_vector(n, j);
            let cluster: Vec<usize> =
                (0..j).filter(|&i| (values[i] - lambda).abs() <= tol).collect();
            for _ in 0..INVERSE_STEPS {
                lu.solve_in_place(&mut v);
                for &i in &cluster {
                    let d = dot(&out[i], &v);
                    v.iter_mut().zip(&out[i]).for_each(|(a, b)| *a -= d * b);
                }
                normalize(&mut v);
            }
            out.push(v);
        }
        out
    }
}

fn start_vector(n: usize, salt: usize) -> Vec<f64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    (0..n)
        .map(|i| {
            let t = ((i + 7 * salt) as f64 * GOLDEN).fract();
            0.75 + (t - 0.5)
        })
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn normalize(v: &mut [f64]) {
    let s = dot(v, v).sqrt();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// LU factorization of `T - shift*I` with partial pivoting.
#[derive(Debug, Clone)]
pub struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    pub fn factor(diag: &[f64], off: &[f64], shift: f64) -> Self {
        let n = diag.len();
        let norm = SymTridiag::new(diag, off).norm().max(shift.abs()).max(f64::MIN_POSITIVE);
        let guard = f64::EPSILON * norm;
        let mut d: Vec<f64> = diag.iter().map(|a| a - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = guard;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if let Some(last) = d.last_mut() {
            if last.abs() < guard {
                *last = if *last < 0.0 { -guard } else { guard };
            }
        }
        TridiagLu { dl, d, du, du2, swapped }
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Lowest eigenpair of a small tridiagonal matrix, unit Euclidean vector.
pub fn lowest_pair(diag: &[f64], off: &[f64]) -> (f64, Vec<f64>) {
    let t = SymTridiag::new(diag, off);
    let e = t.eigenvalue(0);
    let v = t.eigenvectors(&[e]).pop().expect("one vector");
    (e, v)
}
