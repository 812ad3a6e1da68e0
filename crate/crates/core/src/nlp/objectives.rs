//! Exact objective functions `W3`..`W12` and the closed form `W13`.
//!
//! Each function transcribes its program's displayed objective term by term;
//! none is derived from another, so the substitution identities checked in
//! the chain suite compare independent transcriptions.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{NlpError, ProgramId, ScalarPoint, Var};
use crate::rational::{ramp, Rational as Rat};

fn k(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

fn inv(p: ProgramId, x: &Rat) -> Result<Rat, NlpError> {
    if x.is_zero() {
        Err(NlpError::ZeroDenominator(p))
    } else {
        Ok(x.recip())
    }
}

fn vars<const N: usize>(pt: &ScalarPoint, names: [Var; N]) -> Result<[Rat; N], NlpError> {
    let mut out: [Rat; N] = std::array::from_fn(|_| Rat::zero());
    for (slot, v) in out.iter_mut().zip(names) {
        *slot = pt.req(v)?;
    }
    Ok(out)
}

/// `W3(e0, e, f, g0, q0, q, p0, p, h, r0, r)`.
pub fn w3(pt: &ScalarPoint) -> Result<Rat, NlpError> {
    use Var::*;
    let i = |x: Rat| inv(ProgramId::P3, &x);
    let [e0, e, f, g0, q0, q, p0, p, h, r0, r] =
        vars(pt, [E0, E, F, G0, Q0, Q, P0, P, H, R0, R])?;
    let first = i(p0.clone())?
        * (k(2) * i(&e * &q0)? - i(&e0 * &g0)? - i(&e0 * &q0)?);
    let inner = k(2) * i(&e * &q0 * &p0)? + k(2) * i(&e * &q0 * &p)? + k(2) * i(&e * &q * &p)?
        - i(&e0 * &g0 * &p0)?
        - i(&e0 * &q0 * &p0)?
        - i(&e0 * &q0 * &p)?
        - k(3) * i(&f * &q * &p)?;
    let second = &r * i(h)? * inner;
    Ok(&e0 * &g0 * &r0 * (first + second))
}

/// `W4`: `W3` regrouped with each difference replaced by its ramp.
pub fn w4(pt: &ScalarPoint) -> Result<Rat, NlpError> {
    use Var::*;
    let i = |x: Rat| inv(ProgramId::P4, &x);
    let [e0, e, f, g0, q0, q, p0, p, h, r0, r] =
        vars(pt, [E0, E, F, G0, Q0, Q, P0, P, H, R0, R])?;
    let outer = i(p0.clone())? + &r * i(&h * &p0)?;
    let bracket1 = (i(q0.clone())? + i(g0.clone())?) * ramp(&(&e0 - &e)) * i(&e * &e0)?
        + ramp(&(&g0 - &q0)) * i(&e * &q0 * &g0)?;
    let bracket2 = ramp(&(&e0 - &e)) * i(&q0 * &e * &e0)?
        + k(3) * ramp(&(&f - &e)) * i(&q * &e * &f)?
        + ramp(&(&q - &q0)) * i(&e * &q0 * &q)?;
    let total = outer * bracket1 + &r * i(&h * &p)? * bracket2;
    Ok(&e0 * &g0 * &r0 * total)
}

/// `W5(x, y', e0, e, f, g0, q0, q, p0)`.
pub fn w5(pt: &ScalarPoint) -> Result<Rat, NlpError> {
    use Var::*;
    let i = |x: Rat| inv(ProgramId::P5, &x);
    let [yp, e0, e, f, g0, q0, q, p0] = vars(pt, [YPrime, E0, E, F, G0, Q0, Q, P0])?;
    let h = &p0 + &q - &e;
    let outer = i(p0.clone())? + i(h.clone())?;
    let bracket1 = (i(q0.clone())? + i(g0.clone())?) * ramp(&(&e0 - &e)) * i(&e * &e0)?
        + ramp(&(&g0 - &q0)) * i(&e * &q0 * &g0)?;
    let bracket2 = ramp(&(&e0 - &e)) * i(&q0 * &e * &e0)?
        + k(3) * ramp(&(&f - &e)) * i(&q * &e * &f)?
        + ramp(&(&q - &q0)) * i(&e * &q0 * &q)?;
    let coef2 = &p0 * i(&h * (&q0 + &f - &yp))?;
    Ok(&e0 * &g0 * &g0 * (outer * bracket1 + coef2 * bracket2))
}

/// `W6(x, y', e0, e, f, g0, q)`.
pub fn w6(pt: &ScalarPoint) -> Result<Rat, NlpError> {
    use Var::*;
    let i = |x: Rat| inv(ProgramId::P6, &x);
    let [x, yp, e0, e, f, g0, q] = vars(pt, [X, YPrime, E0, E, F, G0, Q])?;
    let eex = &e + &e0 - &x;
    let outer = i(&g0 + &e - &x)? + i(&g0 + &q - &x)?;
    let bracket1 = (i(eex.clone())? + i(g0.clone())?) * ramp(&(&e0 - &e)) * i(&e * &e0)?
        + ramp(&(&g0 - &e - &e0 + &x)) * i(&e * &eex * &g0)?;
    let coef2 = (&g0 + &e - &x) * i((&g0 + &q - &x) * (&eex + &f - &yp))?;
    let bracket2 = ramp(&(&e0 - &e)) * i(&eex * &e * &e0)?
        + k(3) * ramp(&(&f - &e)) * i(&q * &e * &f)?
        + ramp(&(&q - &e - &e0 + &x)) * i(&e * &eex * &q)?;
    Ok(&e0 * &g0 * &g0 * (outer * bracket1 + coef2 * bracket2))
}

/// `W7(x, y', e0, e, f, g0)`.
pub fn w7(pt: &ScalarPoint) -> Result<Rat, NlpError> {
    use Var::*;
    let i = |x: Rat| inv(ProgramId::P7, &x);
    let [x, yp, e0, e, f, g0] = vars(pt, [X, YPrime, E0, E, F, G0])?;
    let eex = &e + &e0 - &x;
    let gefy = &g0 + &e + &f - &yp - &x;
    let outer = i(&g0 + &e - &x)? + i(gefy.clone())?;
    let bracket1 = (i(eex.clone())? + i(g0.clone())?) * ramp(&(&e0 - &e)) * i(&e * &e0)?
        + ramp(&(&g0 - &e - &e0 + &x)) * i(&e * &eex * &g0)?;
    let coef2 = (&g0 + &e - &x) * i(&gefy * (&eex + &f - &yp))?;
    let bracket2 = ramp(&(&e0 - &e)) * i(&eex * &e * &e0)?
        + k(3) * ramp(&(&f - &e)) * i((&e + &f - &yp) * &e * &f)?
        + (&x - &e0) * i(&e * &e * &eex)?;
    Ok(&e0 * &g0 * &g0 * (outer * bracket1 + coef2 * bracket2))
}

/// `W8(x, y', e0, e, f)`; `d` enters through the bound `g0 >= e0 - d`.
pub fn w8(pt: &ScalarPoint, d: &Rat) -> Result<Rat, NlpError> {
    use Var::*;
    let [x, yp, e0, e, f] = vars(pt, [X, YPrime, E0, E, F])?;
    w8_values(&x, &yp, &e0, &e, &f, d)
}

fn w8_values(x: &Rat, yp: &Rat, e0: &Rat, e: &Rat, f: &Rat, d: &Rat) -> Result<Rat, NlpError> {
    let i = |v: Rat| inv(ProgramId::P8, &v);
    let eex = e + e0 - x;
    let eefy = e0 + e + f - yp - x;
    let sq = e0 * e0;
    let outer = &sq * i(eex.clone())? + &sq * i(eefy.clone())?;
    let bracket1 = (i(eex.clone())? + i(e0 - d)?) * ramp(&(e0 - e)) * i(e * e0)?
        + (x - e) * i(e * &eex * e0)?;
    let coef2 = &sq * &eex * i(&eefy * &eefy)?;
    let bracket2 = ramp(&(e0 - e)) * i(&eex * e * e0)?
        + k(3) * ramp(&(f - e)) * i((e + f - yp) * e * f)?
        + (x - e0) * i(e * e * &eex)?;
    Ok(e0 * (outer * bracket1 + coef2 * bracket2))
}

/// `Ŵ9(x, y', e0, f)`: `W8` with `e` pinned to `x + y' - 1`, in the original
/// variables.
pub fn w9_hat(x: &Rat, yp: &Rat, e0: &Rat, f: &Rat, d: &Rat) -> Result<Rat, NlpError> {
    let i = |v: Rat| inv(ProgramId::P9, &v);
    let one = k(1);
    let s = x + yp - &one;
    let ey = e0 + yp - &one;
    let ef = e0 + f - &one;
    let sq = e0 * e0;
    let lift = ramp(&(e0 - x - yp + &one));
    let outer = &sq * i(ey.clone())? + &sq * i(ef.clone())?;
    let bracket1 = (i(ey.clone())? + i(e0 - d)?) * &lift * i(s.clone())?
        + (&one - yp) * i(&s * &ey)?;
    let coef2 = &ey * &sq * e0 * i(&ef * &ef)?;
    let bracket2 = &lift * i(&ey * &s * e0)?
        + k(3) * ramp(&(f - x - yp + &one)) * i((x + f - &one) * &s * f)?
        + (x - e0) * i(&s * &s * &ey)?;
    Ok(outer * bracket1 + coef2 * bracket2)
}

/// `W9(x, y', a, b)` with `e0 = x - a` and `f = y' - b`.
pub fn w9(pt: &ScalarPoint, d: &Rat) -> Result<Rat, NlpError> {
    use Var::*;
    let i = |v: Rat| inv(ProgramId::P9, &v);
    let [x, yp, a, b] = vars(pt, [X, YPrime, A, B])?;
    let one = k(1);
    let xa = &x - &a;
    let s = &x + &yp - &one;
    let xay = &xa + &yp - &one;
    let xayb = &xay - &b;
    let lift = ramp(&(&one - &yp - &a));
    let sq = &xa * &xa;
    let cube = &sq * &xa;
    let t1 = (&sq * i(xay.clone())? + &sq * i(xayb.clone())?)
        * ((&lift + &one - &yp) * i(&xay * &s)? + &lift * i((&xa - d) * &s)?);
    let t2 = &sq * &lift * i(&s * &xayb * &xayb)?;
    let t3 = &a * &cube * i(&xayb * &xayb * &s * &s)?;
    let t4 = k(3) * &xay * &cube * ramp(&(&one - &x - &b))
        * i((&s - &b) * &s * (&yp - &b) * &xayb * &xayb)?;
    Ok(t1 + t2 + t3 + t4)
}

/// `W10(x, a, b)`.
pub fn w10(pt: &ScalarPoint, d: &Rat) -> Result<Rat, NlpError> {
    use Var::*;
    let i = |v: Rat| inv(ProgramId::P10, &v);
    let [x, a, b] = vars(pt, [X, A, B])?;
    let xa = &x - &a;
    let xad = &xa - d;
    let xd = &x - d;
    let xabd = &xad - &b;
    let sq = &xa * &xa;
    let cube = &sq * &xa;
    let t1 = (&sq * i(xad.clone())? + &sq * i(xabd.clone())?)
        * (k(3) * d - k(2) * &a)
        * i(&xad * &xd)?;
    let t2 = &sq * (d - &a) * i(&xd * &xabd * &xabd)?;
    let t3 = &a * &cube * i(&xabd * &xabd * &xd * &xd)?;
    let t4 = k(3) * &xad * &cube * ramp(&(k(1) - &x - &b))
        * i((&xd - &b) * &xd * (k(1) - d - &b) * &xabd * &xabd)?;
    Ok(t1 + t2 + t3 + t4)
}

/// `W11(a, b)`.
pub fn w11(pt: &ScalarPoint, d: &Rat) -> Result<Rat, NlpError> {
    use Var::*;
    let i = |v: Rat| inv(ProgramId::P11, &v);
    let [a, b] = vars(pt, [A, B])?;
    let one = k(1);
    let u = &one - d - &a;
    let v = &one - &a - k(2) * d;
    let w = &one - k(2) * d;
    let vb = &v - &b;
    let sq = &u * &u;
    let cube = &sq * &u;
    let t1 = (&sq * i(v.clone())? + &sq * i(vb.clone())?) * (k(3) * d - k(2) * &a) * i(&v * &w)?;
    let t2 = &sq * (d - &a) * i(&w * &vb * &vb)?;
    let t3 = &a * &cube * i(&vb * &vb * &w * &w)?;
    let t4 = k(3) * &v * &cube * (d - &b)
        * i((&w - &b) * &w * (&one - d - &b) * &vb * &vb)?;
    Ok(t1 + t2 + t3 + t4)
}

/// `W12(a)`.
pub fn w12(pt: &ScalarPoint, d: &Rat) -> Result<Rat, NlpError> {
    let a = pt.req(Var::A)?;
    w12_at(&a, d)
}

pub fn w12_at(a: &Rat, d: &Rat) -> Result<Rat, NlpError> {
    let i = |v: Rat| inv(ProgramId::P12, &v);
    let one = k(1);
    let u = &one - d - a;
    let v = &one - a - k(2) * d;
    let v3 = &one - a - k(3) * d;
    let w = &one - k(2) * d;
    let sq = &u * &u;
    let cube = &sq * &u;
    let t1 = (&sq * i(v.clone())? + &sq * i(v3.clone())?) * (k(3) * d - k(2) * a) * i(&v * &w)?;
    let t2 = &sq * (d - a) * i(&w * &v3 * &v3)?;
    let t3 = a * &cube * i(&v3 * &v3 * &w * &w)?;
    let t4 = k(3) * &v * &cube * d * i((&one - k(3) * d) * &w * &w * &v3 * &v3)?;
    Ok(t1 + t2 + t3 + t4)
}

/// The closed-form bound `W13(d)`, defined for `d` in `[0, 1/4)`.
pub fn w13(d: &Rat) -> Result<Rat, NlpError> {
    let i = |v: Rat| inv(ProgramId::W13, &v);
    let one = k(1);
    let u = &one - d;
    let w2 = &one - k(2) * d;
    let w3 = &one - k(3) * d;
    let sq = &u * &u;
    let cube = &sq * &u;
    let t1 = (&sq * i(w2.clone())? + &sq * i(w3.clone())?) * k(3) * d * i(&w2 * &w2)?;
    let t2 = &sq * d * i(&w2 * &w3 * &w3)?;
    let t3 = d * &cube * i(&w3 * &w3 * &w2 * &w2)?;
    let t4 = k(3) * &cube * d * i(&w3 * &w3 * &w3 * &w2)?;
    Ok(t1 + t2 + t3 + t4)
}

/// Objective of a scalar program. `P9` uses the `(x, y', a, b)` form.
pub fn eval_scalar(p: ProgramId, pt: &ScalarPoint, d: &Rat) -> Result<Rat, NlpError> {
    match p {
        ProgramId::P1 | ProgramId::P2 => Err(NlpError::WrongPointKind(p, "scalar")),
        ProgramId::P3 => w3(pt),
        ProgramId::P4 => w4(pt),
        ProgramId::P5 => w5(pt),
        ProgramId::P6 => w6(pt),
        ProgramId::P7 => w7(pt),
        ProgramId::P8 => w8(pt, d),
        ProgramId::P9 => w9(pt, d),
        ProgramId::P10 => w10(pt, d),
        ProgramId::P11 => w11(pt, d),
        ProgramId::P12 => w12(pt, d),
        ProgramId::W13 => w13(d),
    }
}
