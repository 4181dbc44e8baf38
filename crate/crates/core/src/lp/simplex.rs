//! Dense revised simplex for the restricted master problem
//! `min c^T x, A x - s = b, x, s >= 0` in floating point.

const PIVOT_TOL: f64 = 1e-9;
const REINVERT_EVERY: usize = 64;
const DEGENERATE_LIMIT: usize = 40;

pub struct Master {
    m: usize,
    b: Vec<f64>,
    /// Structural columns; the surplus column of row `i` is variable `i`,
    /// structural column `j` is variable `m + j`.
    cols: Vec<Vec<f64>>,
    costs: Vec<f64>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    since_reinvert: usize,
    pub pivots: usize,
}

impl Master {
    /// Starts from structural columns `initial`, which must form a
    /// non-singular basis with `B^-1 b >= 0`.
    pub fn new(b: Vec<f64>, initial: Vec<(Vec<f64>, f64)>) -> Result<Self, String> {
        let m = b.len();
        if initial.len() != m {
            return Err("initial basis must have one column per row".into());
        }
        let mut s = Master {
            m,
            b,
            cols: Vec::new(),
            costs: Vec::new(),
            basis: (0..m).map(|j| m + j).collect(),
            binv: vec![0.0; m * m],
            xb: vec![0.0; m],
            since_reinvert: 0,
            pivots: 0,
        };
        for (a, c) in initial {
            s.cols.push(a);
            s.costs.push(c);
        }
        s.reinvert()?;
        Ok(s)
    }

    pub fn add_column(&mut self, a: Vec<f64>, cost: f64) -> usize {
        self.cols.push(a);
        self.costs.push(cost);
        self.cols.len() - 1
    }

    pub fn n_columns(&self) -> usize {
        self.cols.len()
    }

    fn column(&self, var: usize) -> Vec<f64> {
        if var < self.m {
            let mut e = vec![0.0; self.m];
            e[var] = -1.0;
            e
        } else {
            self.cols[var - self.m].clone()
        }
    }

    fn cost(&self, var: usize) -> f64 {
        if var < self.m {
            0.0
        } else {
            self.costs[var - self.m]
        }
    }

    /// Rebuilds `B^-1` from scratch by Gauss-Jordan with partial pivoting.
    fn reinvert(&mut self) -> Result<(), String> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (k, &var) in self.basis.iter().enumerate() {
            let col = self.column(var);
            for i in 0..m {
                a[i * m + k] = col[i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let mut piv = c;
            for r in c + 1..m {
                if a[r * m + c].abs() > a[piv * m + c].abs() {
                    piv = r;
                }
            }
            if a[piv * m + c].abs() < 1e-12 {
                return Err("singular basis".into());
            }
            if piv != c {
                for k in 0..m {
                    a.swap(piv * m + k, c * m + k);
                    inv.swap(piv * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r != c {
                    let f = a[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[c * m + k];
                            inv[r * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.xb[i] = row.iter().zip(&self.b).map(|(x, y)| x * y).sum::<f64>().max(0.0);
        }
        self.since_reinvert = 0;
        Ok(())
    }

    /// Simplex multipliers `y = c_B^T B^-1`.
    pub fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (k, &var) in self.basis.iter().enumerate() {
            let c = self.cost(var);
            if c != 0.0 {
                for i in 0..m {
                    y[i] += c * self.binv[k * m + i];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, var: usize, y: &[f64]) -> f64 {
        if var < self.m {
            y[var]
        } else {
            let a = &self.cols[var - self.m];
            self.costs[var - self.m] - a.iter().zip(y).map(|(p, q)| p * q).sum::<f64>()
        }
    }

    /// Runs primal simplex over the current columns to optimality.
    pub fn optimize(&mut self, max_pivots: usize) -> Result<(), String> {
        let m = self.m;
        let mut degenerate = 0usize;
        let mut in_basis = vec![false; m + self.cols.len()];
        for &v in &self.basis {
            in_basis[v] = true;
        }
        for _ in 0..max_pivots {
            if self.since_reinvert >= REINVERT_EVERY {
                self.reinvert()?;
            }
            let y = self.duals();
            let bland = degenerate > DEGENERATE_LIMIT;
            let mut enter = None;
            let mut best = -PIVOT_TOL;
            for var in 0..m + self.cols.len() {
                if in_basis[var] {
                    continue;
                }
                let d = self.reduced_cost(var, &y);
                if d < best {
                    enter = Some(var);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = enter else { return Ok(()) };
            let a = self.column(q);
            let mut u = vec![0.0; m];
            for i in 0..m {
                let row = &self.binv[i * m..(i + 1) * m];
                u[i] = row.iter().zip(&a).map(|(x, y)| x * y).sum();
            }
            let mut leave = None;
            let mut ratio = f64::INFINITY;
            for i in 0..m {
                if u[i] > PIVOT_TOL {
                    let r = self.xb[i] / u[i];
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            if bland {
                                r < ratio - 1e-12 || (r <= ratio + 1e-12 && self.basis[i] < self.basis[l])
                            } else {
                                r < ratio - 1e-12 || (r <= ratio + 1e-12 && u[i] > u[l])
                            }
                        }
                    };
                    if better {
                        leave = Some(i);
                        ratio = ratio.min(r);
                    }
                }
            }
            let Some(r) = leave else { return Err("unbounded restricted master".into()) };
            let theta = self.xb[r] / u[r];
            if theta <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            for i in 0..m {
                if i != r {
                    self.xb[i] = (self.xb[i] - theta * u[i]).max(0.0);
                }
            }
            self.xb[r] = theta;
            let pr = u[r];
            for k in 0..m {
                self.binv[r * m + k] /= pr;
            }
            for i in 0..m {
                if i != r && u[i] != 0.0 {
                    let f = u[i];
                    for k in 0..m {
                        self.binv[i * m + k] -= f * self.binv[r * m + k];
                    }
                }
            }
            in_basis[self.basis[r]] = false;
            in_basis[q] = true;
            self.basis[r] = q;
            self.since_reinvert += 1;
            self.pivots += 1;
        }
        Err("pivot limit reached".into())
    }

    pub fn refresh(&mut self) -> Result<(), String> {
        self.reinvert()
    }

    /// Basic variables in row order: `i < m` is the surplus of row `i`,
    /// otherwise structural column `v - m`.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn n_rows(&self) -> usize {
        self.m
    }

    pub fn objective(&self) -> f64 {
        self.basis.iter().zip(&self.xb).map(|(&v, x)| self.cost(v) * x).sum()
    }

    /// Values of the structural columns in the current basic solution.
    pub fn primal(&self) -> Vec<(usize, f64)> {
        self.basis
            .iter()
            .zip(&self.xb)
            .filter(|(&v, _)| v >= self.m)
            .map(|(&v, &x)| (v - self.m, x))
            .collect()
    }
}
