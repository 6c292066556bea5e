use num_complex::Complex64;

use super::{SolverParams, State, Tendency};
use crate::calculus::{curl, leray_project, mollify, to_spectral_dealiased};
use crate::fields::{inverse_many, ScalarField, VectorField, ZERO};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Non-diffusive tendencies of the projected system.
///
/// `du = −P[(u·∇)u − J×b]`, `db = ∇×(u×b − J×b)` with `J = ∇×b`; the Hall
/// part `J×b` of `db` is dropped when `hall_on` is false.
pub fn rhs(state: &State, params: &SolverParams) -> Tendency {
    nonlinear(&state.u, &state.b, params.hall_on)
}

/// Tendencies of the mollified system at level `level`: every field entering
/// a product is `J_n`-filtered, and so is every output.
pub fn rhs_regularized(state: &State, params: &SolverParams, level: usize) -> Tendency {
    regularized(&state.u, &state.b, params.hall_on, level)
}

fn regularized(u: &VectorField, b: &VectorField, hall_on: bool, level: usize) -> Tendency {
    let t = nonlinear(&mollify(u, level), &mollify(b, level), hall_on);
    Tendency { du: mollify(&t.du, level), db: mollify(&t.db, level) }
}

/// Dispatch on `params.mollifier_level`.
pub fn tendency(state: &State, params: &SolverParams) -> Tendency {
    tendency_of(&state.u, &state.b, params)
}

pub(crate) fn tendency_of(u: &VectorField, b: &VectorField, params: &SolverParams) -> Tendency {
    match params.mollifier_level {
        Some(level) => regularized(u, b, params.hall_on, level),
        None => nonlinear(u, b, params.hall_on),
    }
}

pub(crate) fn nonlinear(u: &VectorField, b: &VectorField, hall_on: bool) -> Tendency {
    let g = u.grid();
    let len = g.len();
    let j = curl(b);

    let mut derivs: Vec<Vec<Complex64>> = Vec::with_capacity(9);
    for i in 0..3 {
        let comp = u.component(i);
        for d in 0..3 {
            let mut out = vec![ZERO; len];
            for (idx, o) in out.iter_mut().enumerate() {
                *o = I * g.k_vec(idx)[d] * comp[idx];
            }
            derivs.push(out);
        }
    }
    // b and J share transforms only with each other, so b = 0 stays exactly zero
    let mut specs: Vec<&[Complex64]> = Vec::with_capacity(18);
    for f in [b, &j, u] {
        for c in 0..3 {
            specs.push(f.component(c));
        }
    }
    specs.extend(derivs.iter().map(|d| d.as_slice()));
    let phys = inverse_many(g, &specs);
    let (pb, rest) = phys.split_at(3);
    let (pj, rest) = rest.split_at(3);
    let (pu, grad_u) = rest.split_at(3);

    let mut force: [Vec<f64>; 3] = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let mut emf: [Vec<f64>; 3] = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for p in 0..len {
        let uu = [pu[0][p], pu[1][p], pu[2][p]];
        let bb = [pb[0][p], pb[1][p], pb[2][p]];
        let jj = [pj[0][p], pj[1][p], pj[2][p]];
        let jxb = [jj[1] * bb[2] - jj[2] * bb[1], jj[2] * bb[0] - jj[0] * bb[2], jj[0] * bb[1] - jj[1] * bb[0]];
        let uxb = [uu[1] * bb[2] - uu[2] * bb[1], uu[2] * bb[0] - uu[0] * bb[2], uu[0] * bb[1] - uu[1] * bb[0]];
        for i in 0..3 {
            let adv = uu[0] * grad_u[3 * i][p] + uu[1] * grad_u[3 * i + 1][p] + uu[2] * grad_u[3 * i + 2][p];
            force[i][p] = adv - jxb[i];
            emf[i][p] = if hall_on { uxb[i] - jxb[i] } else { uxb[i] };
        }
    }
    // transformed separately so the two never mix through shared FFTs
    let force = to_spectral_dealiased(g, &force);
    let emf = to_spectral_dealiased(g, &emf);

    Tendency { du: leray_project(&force).scaled(-1.0), db: curl(&emf) }
}

/// Zero-mean pressure solving `−Δp = div((u·∇)u − J×b)`.
pub fn recover_pressure(state: &State, params: &SolverParams) -> ScalarField {
    let (u, b) = match params.mollifier_level {
        Some(level) => (mollify(&state.u, level), mollify(&state.b, level)),
        None => (state.u.clone(), state.b.clone()),
    };
    let source = pressure_source(&u, &b);
    let g = u.grid();
    let coeffs = (0..g.len())
        .map(|idx| {
            let k = g.k_vec(idx);
            let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if kk == 0.0 {
                return ZERO;
            }
            let kc = k[0] * source.component(0)[idx] + k[1] * source.component(1)[idx] + k[2] * source.component(2)[idx];
            I * kc / kk
        })
        .collect();
    ScalarField::from_coeffs(g, coeffs).expect("shape preserved")
}

/// `(u·∇)u − J×b`, dealiased.
pub(crate) fn pressure_source(u: &VectorField, b: &VectorField) -> VectorField {
    let adv = crate::calculus::advect(u, u).expect("state fields share a grid");
    let lorentz = crate::calculus::cross(&curl(b), b).expect("state fields share a grid");
    adv.sub(&lorentz)
}
