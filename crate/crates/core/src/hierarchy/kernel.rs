//! Per-ADO evaluation of the hierarchy right-hand side on flat storage.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{HeomOperator, MAX_DIM, NO_NEIGHBOR};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const BLOCK: usize = 64;

type Scratch = [C64; MAX_DIM * MAX_DIM];

pub(super) fn evaluate(op: &HeomOperator, h: &[C64], x: &[C64], out: &mut [C64]) {
    match op.dim() {
        2 => dispatch::<2>(op, h, x, out),
        3 => dispatch::<3>(op, h, x, out),
        _ => dispatch::<0>(op, h, x, out),
    }
}

fn dispatch<const D: usize>(op: &HeomOperator, h: &[C64], x: &[C64], out: &mut [C64]) {
    let d = if D == 0 { op.dim() } else { D };
    let dd = d * d;
    if op.pool.is_some() {
        out.par_chunks_mut(dd * BLOCK)
            .enumerate()
            .for_each(|(b, chunk)| {
                for (i, o) in chunk.chunks_exact_mut(dd).enumerate() {
                    ado::<D>(op, d, b * BLOCK + i, h, x, o);
                }
            });
    } else {
        for (id, o) in out.chunks_exact_mut(dd).enumerate() {
            ado::<D>(op, d, id, h, x, o);
        }
    }
}

/// out += α·(A·B − B·A)
#[inline(always)]
fn commutator_acc<const D: usize>(d: usize, alpha: C64, a: &[C64], b: &[C64], out: &mut [C64]) {
    let d = if D == 0 { d } else { D };
    for r in 0..d {
        for c in 0..d {
            let mut acc = ZERO;
            for k in 0..d {
                acc += a[r * d + k] * b[k * d + c] - b[r * d + k] * a[k * d + c];
            }
            out[r * d + c] += alpha * acc;
        }
    }
}

/// out += A·B + B·A
#[inline(always)]
fn anticommutator_acc<const D: usize>(d: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
    let d = if D == 0 { d } else { D };
    for r in 0..d {
        for c in 0..d {
            let mut acc = ZERO;
            for k in 0..d {
                acc += a[r * d + k] * b[k * d + c] + b[r * d + k] * a[k * d + c];
            }
            out[r * d + c] += acc;
        }
    }
}

#[inline(always)]
fn axpy(alpha: f64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi * alpha;
    }
}

fn ado<const D: usize>(
    op: &HeomOperator,
    d: usize,
    id: usize,
    h: &[C64],
    x: &[C64],
    out: &mut [C64],
) {
    let dd = d * d;
    let table = &op.table;
    let rho = &x[id * dd..(id + 1) * dd];
    let minus_i = C64::new(0.0, -1.0);

    let gamma = op.damping[id];
    for (o, r) in out.iter_mut().zip(rho) {
        *o = -gamma * r;
    }
    commutator_acc::<D>(d, minus_i, h, rho, out);

    let index = table.index(id);
    let mut w: Scratch = [ZERO; MAX_DIM * MAX_DIM];
    let mut q: Scratch = [ZERO; MAX_DIM * MAX_DIM];
    for (k, range) in op.bath_modes.iter().enumerate() {
        let w = &mut w[..dd];
        let q = &mut q[..dd];
        w.fill(ZERO);
        let mut any_w = false;
        let mut any_q = false;
        for m in range.clone() {
            let mode = &op.modes[m];
            let up = table.up(id, m);
            if up != NO_NEIGHBOR {
                let n = index[m] as f64;
                let up = up as usize;
                axpy(
                    ((n + 1.0) * mode.scale).sqrt(),
                    &x[up * dd..(up + 1) * dd],
                    w,
                );
                any_w = true;
            }
            let down = table.down(id, m);
            if down != NO_NEIGHBOR {
                let n = index[m] as f64;
                let down = down as usize;
                let lower = &x[down * dd..(down + 1) * dd];
                let coef = (n / mode.scale).sqrt();
                if mode.c_real != 0.0 {
                    axpy(coef * mode.c_real, lower, w);
                    any_w = true;
                }
                if mode.c_imag != 0.0 {
                    if !any_q {
                        q.fill(ZERO);
                    }
                    axpy(coef * mode.c_imag, lower, q);
                    any_q = true;
                }
            }
        }
        let v = &op.couplings[k];
        let delta = op.deltas[k];
        if delta != 0.0 {
            // −iΔ[V, ρ_n] folded into W gives −Δ[V,[V,ρ_n]].
            commutator_acc::<D>(d, C64::new(0.0, -delta), v, rho, w);
            any_w = true;
        }
        if any_w {
            commutator_acc::<D>(d, minus_i, v, w, out);
        }
        if any_q {
            anticommutator_acc::<D>(d, v, q, out);
        }
    }
}
