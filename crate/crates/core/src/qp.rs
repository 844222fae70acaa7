//! Dense strictly convex quadratic programming by the dual active-set method
//! of Goldfarb and Idnani.
//!
//! Solves `min ½ xᵀGx + aᵀx` subject to `n_iᵀx = b_i` (equalities) and
//! `n_jᵀx ≥ b_j` (inequalities) with `G` symmetric positive definite. The
//! method starts from the unconstrained minimizer, so no feasible starting
//! point is needed, and it tolerates linearly dependent active constraints.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub normal: DVector<f64>,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn new(normal: DVector<f64>, rhs: f64) -> Self {
        LinearConstraint { normal, rhs }
    }
}

#[derive(Debug, Clone)]
pub struct QuadraticProgram {
    pub hessian: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub equalities: Vec<LinearConstraint>,
    pub inequalities: Vec<LinearConstraint>,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Indices of active inequalities with their multipliers.
    pub active: Vec<(usize, f64)>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Eq(usize),
    Ineq(usize),
}

struct State {
    x: DVector<f64>,
    j: DMatrix<f64>,
    r: DMatrix<f64>,
    q: usize,
    active: Vec<Slot>,
    u: Vec<f64>,
}

const EPS: f64 = 1e-14;

impl State {
    fn back_substitute(&self, d: &DVector<f64>) -> Vec<f64> {
        let q = self.q;
        let mut out = vec![0.0; q];
        for i in (0..q).rev() {
            let mut acc = d[i];
            for k in i + 1..q {
                acc -= self.r[(i, k)] * out[k];
            }
            out[i] = acc / self.r[(i, i)];
        }
        out
    }

    fn rotate_j_columns(&mut self, a: usize, b: usize, c: f64, s: f64) {
        for row in 0..self.j.nrows() {
            let x = self.j[(row, a)];
            let y = self.j[(row, b)];
            self.j[(row, a)] = c * x + s * y;
            self.j[(row, b)] = -s * x + c * y;
        }
    }

    fn push(&mut self, mut d: DVector<f64>, slot: Slot, mult: f64) {
        let n = d.len();
        let q = self.q;
        for k in (q + 1..n).rev() {
            let (a, b) = (d[k - 1], d[k]);
            if b == 0.0 {
                continue;
            }
            let h = a.hypot(b);
            let (c, s) = (a / h, b / h);
            d[k - 1] = h;
            d[k] = 0.0;
            self.rotate_j_columns(k - 1, k, c, s);
        }
        for i in 0..=q {
            self.r[(i, q)] = d[i];
        }
        self.q += 1;
        self.active.push(slot);
        self.u.push(mult);
    }

    fn drop(&mut self, pos: usize) {
        let q = self.q;
        for col in pos..q - 1 {
            for row in 0..q {
                self.r[(row, col)] = self.r[(row, col + 1)];
            }
        }
        for row in 0..q {
            self.r[(row, q - 1)] = 0.0;
        }
        for jcol in pos..q - 1 {
            let (a, b) = (self.r[(jcol, jcol)], self.r[(jcol + 1, jcol)]);
            if b == 0.0 {
                continue;
            }
            let h = a.hypot(b);
            let (c, s) = (a / h, b / h);
            for col in jcol..q - 1 {
                let x = self.r[(jcol, col)];
                let y = self.r[(jcol + 1, col)];
                self.r[(jcol, col)] = c * x + s * y;
                self.r[(jcol + 1, col)] = -s * x + c * y;
            }
            self.r[(jcol + 1, jcol)] = 0.0;
            self.rotate_j_columns(jcol, jcol + 1, c, s);
        }
        self.q -= 1;
        self.active.remove(pos);
        self.u.remove(pos);
    }

    /// Adds the constraint `npᵀx ≥ bp` (or `=` when `slot` is an equality,
    /// with the sign arranged so that the current point violates it or sits on it).
    fn add(&mut self, np: &DVector<f64>, bp: f64, slot: Slot, iterations: &mut usize, cap: usize) -> Result<()> {
        let n = self.x.len();
        let mut u_plus = 0.0;
        let scale = 1.0 + np.norm();
        loop {
            *iterations += 1;
            if *iterations > cap {
                return Err(Error::Convergence {
                    what: "quadratic program iteration cap".into(),
                    residual: np.dot(&self.x) - bp,
                });
            }
            let s = np.dot(&self.x) - bp;
            let d = self.j.transpose() * np;
            let q = self.q;
            let mut z = DVector::zeros(n);
            for k in q..n {
                z += self.j.column(k) * d[k];
            }
            let r = self.back_substitute(&d);

            let mut t1 = f64::INFINITY;
            let mut drop_at = None;
            for (pos, slot_k) in self.active.iter().enumerate() {
                if matches!(slot_k, Slot::Ineq(_)) && r[pos] > EPS {
                    let ratio = self.u[pos] / r[pos];
                    if ratio < t1 {
                        t1 = ratio;
                        drop_at = Some(pos);
                    }
                }
            }
            let zn = z.dot(np);
            let t2 = if z.norm() > EPS * scale && zn > 0.0 {
                -s / zn
            } else {
                f64::INFINITY
            };
            let t = t1.min(t2);
            if !t.is_finite() {
                return Err(Error::Infeasible(format!(
                    "constraint {slot:?} cannot be satisfied together with the active set"
                )));
            }
            let t = t.max(0.0);
            for pos in 0..q {
                self.u[pos] -= t * r[pos];
            }
            u_plus += t;
            if t2.is_finite() {
                self.x += &z * t;
            }
            if t2 <= t1 {
                self.push(d, slot, u_plus);
                return Ok(());
            }
            let pos = drop_at.expect("finite t1 has a blocking constraint");
            self.drop(pos);
        }
    }
}

/// Solves the program; fails when the constraints are inconsistent.
pub fn solve(qp: &QuadraticProgram) -> Result<QpSolution> {
    let n = qp.linear.len();
    if qp.hessian.nrows() != n || qp.hessian.ncols() != n {
        return Err(Error::Structure("hessian and linear term disagree in size".into()));
    }
    let chol = qp
        .hessian
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Argument("hessian is not positive definite".into()))?;
    let l = chol.l();
    let lt_inv = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Argument("singular Cholesky factor".into()))?;
    let x = -chol.solve(&qp.linear);
    let mut st = State {
        x,
        j: lt_inv,
        r: DMatrix::zeros(n, n),
        q: 0,
        active: Vec::new(),
        u: Vec::new(),
    };
    let cap = 50 * (qp.equalities.len() + qp.inequalities.len() + n) + 100;
    let mut iterations = 0;

    for (i, c) in qp.equalities.iter().enumerate() {
        let s = c.normal.dot(&st.x) - c.rhs;
        let (np, bp) = if s > 0.0 {
            (-&c.normal, -c.rhs)
        } else {
            (c.normal.clone(), c.rhs)
        };
        // A dependent equality already satisfied contributes nothing.
        let d = st.j.transpose() * &np;
        let tail: f64 = (st.q..n).map(|k| d[k] * d[k]).sum::<f64>().sqrt();
        if tail <= EPS * (1.0 + np.norm()) {
            if s.abs() <= 1e-10 * (1.0 + c.rhs.abs()) {
                continue;
            }
            return Err(Error::Infeasible(format!("equality {i} is inconsistent")));
        }
        st.add(&np, bp, Slot::Eq(i), &mut iterations, cap)?;
    }

    loop {
        let mut worst = None;
        let mut worst_s = 0.0;
        for (i, c) in qp.inequalities.iter().enumerate() {
            if st.active.contains(&Slot::Ineq(i)) {
                continue;
            }
            let norm = c.normal.norm().max(1e-300);
            let s = (c.normal.dot(&st.x) - c.rhs) / norm;
            let tol = 1e-13 * (1.0 + st.x.amax() + c.rhs.abs() / norm);
            if s < -tol && s < worst_s {
                worst_s = s;
                worst = Some(i);
            }
        }
        let Some(i) = worst else { break };
        let c = &qp.inequalities[i];
        st.add(&c.normal, c.rhs, Slot::Ineq(i), &mut iterations, cap)?;
    }

    let active = st
        .active
        .iter()
        .zip(&st.u)
        .filter_map(|(slot, &u)| match slot {
            Slot::Ineq(i) => Some((*i, u)),
            Slot::Eq(_) => None,
        })
        .collect();
    Ok(QpSolution {
        x: st.x,
        active,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn unconstrained() {
        let qp = QuadraticProgram {
            hessian: DMatrix::identity(2, 2),
            linear: dv(&[-1.0, -2.0]),
            equalities: vec![],
            inequalities: vec![],
        };
        let s = solve(&qp).unwrap();
        assert!((s.x - dv(&[1.0, 2.0])).norm() < 1e-14);
    }

    #[test]
    fn projection_onto_simplex_face() {
        // min ½‖x − (1, 1, 1)‖² s.t. Σx = 1, x ≥ 0, x_1 ≤ 0.1
        let qp = QuadraticProgram {
            hessian: DMatrix::identity(3, 3),
            linear: dv(&[-1.0, -1.0, -1.0]),
            equalities: vec![LinearConstraint::new(dv(&[1.0, 1.0, 1.0]), 1.0)],
            inequalities: vec![
                LinearConstraint::new(dv(&[1.0, 0.0, 0.0]), 0.0),
                LinearConstraint::new(dv(&[0.0, 1.0, 0.0]), 0.0),
                LinearConstraint::new(dv(&[0.0, 0.0, 1.0]), 0.0),
                LinearConstraint::new(dv(&[-1.0, 0.0, 0.0]), -0.1),
            ],
        };
        let s = solve(&qp).unwrap();
        assert!((&s.x - dv(&[0.1, 0.45, 0.45])).norm() < 1e-12, "{}", s.x);
    }

    #[test]
    fn classic_quadprog_example() {
        // The example shipped with R's quadprog: D = I, d = (0, 5, 0),
        // A = [[-4, 2, 0], [-3, 1, -2], [0, 0, 1]], b0 = (-8, 2, 0); x* = (0.476, 1.048, 2.095).
        let qp = QuadraticProgram {
            hessian: DMatrix::identity(3, 3),
            linear: dv(&[0.0, -5.0, 0.0]),
            equalities: vec![],
            inequalities: vec![
                LinearConstraint::new(dv(&[-4.0, -3.0, 0.0]), -8.0),
                LinearConstraint::new(dv(&[2.0, 1.0, 0.0]), 2.0),
                LinearConstraint::new(dv(&[0.0, -2.0, 1.0]), 0.0),
            ],
        };
        let s = solve(&qp).unwrap();
        let expect = dv(&[10.0 / 21.0, 22.0 / 21.0, 44.0 / 21.0]);
        assert!((&s.x - &expect).norm() < 1e-12, "{}", s.x);
    }

    #[test]
    fn degenerate_duplicates_are_fine() {
        let c = LinearConstraint::new(dv(&[1.0, 1.0]), 2.0);
        let qp = QuadraticProgram {
            hessian: DMatrix::identity(2, 2),
            linear: dv(&[0.0, 0.0]),
            equalities: vec![],
            inequalities: vec![c.clone(), c.clone(), c],
        };
        let s = solve(&qp).unwrap();
        assert!((s.x - dv(&[1.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        let qp = QuadraticProgram {
            hessian: DMatrix::identity(1, 1),
            linear: dv(&[0.0]),
            equalities: vec![],
            inequalities: vec![
                LinearConstraint::new(dv(&[1.0]), 1.0),
                LinearConstraint::new(dv(&[-1.0]), 0.0),
            ],
        };
        assert!(matches!(solve(&qp), Err(Error::Infeasible(_))));
    }
}
