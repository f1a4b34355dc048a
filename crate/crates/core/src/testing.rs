//! Finite-difference checks for oracles.

use crate::linalg::{Matrix, Vector};
use crate::objectives::Objective;

fn fd_step(x: &Vector) -> f64 {
    1e-6 * (1.0 + x.norm())
}

/// Central-difference gradient.
pub fn fd_gradient(obj: &dyn Objective, x: &Vector) -> Vector {
    let h = fd_step(x);
    Vector::from_fn(x.len(), |i, _| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        (obj.value(&xp) - obj.value(&xm)) / (2.0 * h)
    })
}

/// Central differences of the gradient, symmetrized.
pub fn fd_hessian(obj: &dyn Objective, x: &Vector) -> Matrix {
    let h = fd_step(x);
    let n = x.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        m.set_column(i, &((obj.gradient(&xp) - obj.gradient(&xm)) / (2.0 * h)));
    }
    (&m + m.transpose()) * 0.5
}

/// `‖fd − ∇f‖ / max(‖∇f‖, 1)`.
pub fn fd_gradient_error(obj: &dyn Objective, x: &Vector) -> f64 {
    let g = obj.gradient(x);
    (fd_gradient(obj, x) - &g).norm() / g.norm().max(1.0)
}

/// `‖fd − ∇²f‖_F / max(‖∇²f‖_F, 1)`; infinite when the oracle has no
/// Hessian or the Hessian is not symmetric to 1e-10.
pub fn fd_hessian_error(obj: &dyn Objective, x: &Vector) -> f64 {
    let Some(hess) = obj.hessian(x) else {
        return f64::INFINITY;
    };
    let scale = hess.norm().max(1.0);
    if (&hess - hess.transpose()).norm() > 1e-10 * scale {
        return f64::INFINITY;
    }
    (fd_hessian(obj, x) - &hess).norm() / scale
}
