//! Points of the variable-dimension programs `P1` and `P2`.
//!
//! Both objectives are kept in density-normalised form: `atom` stands for
//! `1/n`, so a block count `R` enters only through `R * atom`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use super::{check_interval, interval, DomainViolation, Lattice, NlpError, ProgramId, ScalarPoint, Var};
use crate::graph::{Graph, GraphError, OrderedClique};
use crate::rational::Rational;

/// Variables attached to one pair `(y_i, z_{i,j})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerBlock {
    pub f: Rational,
    pub q: Rational,
    pub p: Rational,
    pub h: Rational,
}

/// Variables attached to one `y_i`, with one inner block per `z_{i,j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct P1Block {
    pub y_prime: Rational,
    pub e: Rational,
    pub q0: Rational,
    pub p0: Rational,
    pub inner: Vec<InnerBlock>,
}

/// A `P1` block whose inner blocks have been merged into one, with
/// `r = R_i / n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct P2Block {
    pub y_prime: Rational,
    pub e: Rational,
    pub q0: Rational,
    pub p0: Rational,
    pub f: Rational,
    pub q: Rational,
    pub p: Rational,
    pub h: Rational,
    pub r: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructuredFamily {
    P1(Vec<P1Block>),
    P2(Vec<P2Block>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredPoint {
    pub x: Rational,
    pub e0: Rational,
    pub g0: Rational,
    /// `1/n`; the count `R0` is the number of blocks.
    pub atom: Rational,
    pub family: StructuredFamily,
}

fn inv(p: ProgramId, v: &Rational) -> Result<Rational, NlpError> {
    if v.is_zero() {
        Err(NlpError::ZeroDenominator(p))
    } else {
        Ok(v.recip())
    }
}

fn k(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `(1/p0)(2/(e q0) - 1/(e0 g0) - 1/(e0 q0))`.
fn outer_term(
    p: ProgramId,
    e0: &Rational,
    g0: &Rational,
    e: &Rational,
    q0: &Rational,
    p0: &Rational,
) -> Result<Rational, NlpError> {
    let i = |v: Rational| inv(p, &v);
    Ok(i(p0.clone())? * (k(2) * i(e * q0)? - i(e0 * g0)? - i(e0 * q0)?))
}

/// `(1/h)(2/(e q0 p0) + 2/(e q0 p) + 2/(e q p) - 1/(e0 g0 p0) - 1/(e0 q0 p0)
/// - 1/(e0 q0 p) - 3/(f q p))`.
#[allow(clippy::too_many_arguments)]
fn inner_term(
    pid: ProgramId,
    e0: &Rational,
    g0: &Rational,
    e: &Rational,
    q0: &Rational,
    p0: &Rational,
    f: &Rational,
    q: &Rational,
    p: &Rational,
    h: &Rational,
) -> Result<Rational, NlpError> {
    let i = |v: Rational| inv(pid, &v);
    let bracket = k(2) * i(e * q0 * p0)? + k(2) * i(e * q0 * p)? + k(2) * i(e * q * p)?
        - i(e0 * g0 * p0)?
        - i(e0 * q0 * p0)?
        - i(e0 * q0 * p)?
        - k(3) * i(f * q * p)?;
    Ok(i(h.clone())? * bracket)
}

fn count(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

impl StructuredPoint {
    fn kind(&self) -> ProgramId {
        match self.family {
            StructuredFamily::P1(_) => ProgramId::P1,
            StructuredFamily::P2(_) => ProgramId::P2,
        }
    }

    fn expect(&self, p: ProgramId) -> Result<(), NlpError> {
        if self.kind() == p {
            Ok(())
        } else {
            Err(NlpError::WrongPointKind(p, self.kind().name()))
        }
    }

    /// Number of outer blocks, `R0`.
    pub fn block_count(&self) -> usize {
        match &self.family {
            StructuredFamily::P1(b) => b.len(),
            StructuredFamily::P2(b) => b.len(),
        }
    }

    fn base(&self) -> ScalarPoint {
        ScalarPoint::from_pairs([
            (Var::X, self.x.clone()),
            (Var::E0, self.e0.clone()),
            (Var::G0, self.g0.clone()),
        ])
    }

    fn block_point(&self, y_prime: &Rational, e: &Rational, q0: &Rational, p0: &Rational) -> ScalarPoint {
        self.base()
            .with(Var::YPrime, y_prime.clone())
            .with(Var::E, e.clone())
            .with(Var::Q0, q0.clone())
            .with(Var::P0, p0.clone())
    }

    /// Interval violations for program `p`, which must match the family.
    pub fn domain_check(&self, p: ProgramId, d: &Rational) -> Result<Vec<DomainViolation>, NlpError> {
        self.expect(p)?;
        let mut out = Vec::new();
        let mut base = ScalarPoint::new();
        for (var, value) in [(Var::X, &self.x), (Var::E0, &self.e0), (Var::G0, &self.g0)] {
            let (lo, hi) = interval(var, &base, d)?;
            check_interval(&mut out, || var.name().to_string(), value, lo, hi);
            base.set(var, value.clone());
        }
        let r0 = count(self.block_count()) * &self.atom;
        check_interval(&mut out, || "R0/n".to_string(), &r0, Rational::zero(), self.g0.clone());

        let check_block = |out: &mut Vec<DomainViolation>,
                               i: usize,
                               vals: [&Rational; 4]|
         -> Result<ScalarPoint, NlpError> {
            let mut pt = base.clone();
            for (var, value) in [Var::YPrime, Var::E, Var::Q0, Var::P0].into_iter().zip(vals) {
                let (lo, hi) = interval(var, &pt, d)?;
                check_interval(out, || format!("{}[{i}]", var.name()), value, lo, hi);
                pt.set(var, value.clone());
            }
            Ok(pt)
        };
        let check_inner = |out: &mut Vec<DomainViolation>,
                           label: &dyn Fn(Var) -> String,
                           block: &ScalarPoint,
                           vals: [&Rational; 4]|
         -> Result<(), NlpError> {
            let mut pt = block.clone();
            for (var, value) in [Var::F, Var::Q, Var::P, Var::H].into_iter().zip(vals) {
                let (lo, hi) = interval(var, &pt, d)?;
                check_interval(out, || label(var), value, lo, hi);
                pt.set(var, value.clone());
            }
            Ok(())
        };

        match &self.family {
            StructuredFamily::P1(blocks) => {
                for (i, b) in blocks.iter().enumerate() {
                    let pt = check_block(&mut out, i, [&b.y_prime, &b.e, &b.q0, &b.p0])?;
                    let ri = count(b.inner.len()) * &self.atom;
                    check_interval(&mut out, || format!("R[{i}]/n"), &ri, Rational::zero(), b.p0.clone());
                    for (j, ib) in b.inner.iter().enumerate() {
                        let label = |v: Var| format!("{}[{i},{j}]", v.name());
                        check_inner(&mut out, &label, &pt, [&ib.f, &ib.q, &ib.p, &ib.h])?;
                    }
                }
            }
            StructuredFamily::P2(blocks) => {
                for (i, b) in blocks.iter().enumerate() {
                    let pt = check_block(&mut out, i, [&b.y_prime, &b.e, &b.q0, &b.p0])?;
                    let label = |v: Var| format!("{}[{i}]", v.name());
                    check_inner(&mut out, &label, &pt, [&b.f, &b.q, &b.p, &b.h])?;
                    check_interval(&mut out, || format!("r[{i}]"), &b.r, Rational::zero(), b.p0.clone());
                }
            }
        }
        Ok(out)
    }

    /// Objective of `P1` or `P2` at this point; `p` must match the family.
    pub fn objective(&self, p: ProgramId) -> Result<Rational, NlpError> {
        self.expect(p)?;
        let (e0, g0) = (&self.e0, &self.g0);
        let mut total = Rational::zero();
        match &self.family {
            StructuredFamily::P1(blocks) => {
                for b in blocks {
                    total += outer_term(p, e0, g0, &b.e, &b.q0, &b.p0)?;
                    let mut inner_sum = Rational::zero();
                    for ib in &b.inner {
                        inner_sum += inner_term(p, e0, g0, &b.e, &b.q0, &b.p0, &ib.f, &ib.q, &ib.p, &ib.h)?;
                    }
                    total += &self.atom * inner_sum;
                }
            }
            StructuredFamily::P2(blocks) => {
                for b in blocks {
                    total += p2_block_value(e0, g0, b)?;
                }
            }
        }
        Ok(e0 * g0 * &self.atom * total)
    }
}

fn p2_block_value(e0: &Rational, g0: &Rational, b: &P2Block) -> Result<Rational, NlpError> {
    let p = ProgramId::P2;
    Ok(outer_term(p, e0, g0, &b.e, &b.q0, &b.p0)?
        + &b.r * inner_term(p, e0, g0, &b.e, &b.q0, &b.p0, &b.f, &b.q, &b.p, &b.h)?)
}

fn first_max(values: &[Rational]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if best.map_or(true, |b| v > &values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Within every outer block, copies the inner block with the largest inner
/// term (first one on ties) over all the others.
pub fn symmetrize_p1(pt: &StructuredPoint) -> Result<StructuredPoint, NlpError> {
    pt.expect(ProgramId::P1)?;
    let StructuredFamily::P1(blocks) = &pt.family else { unreachable!() };
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        let values = b
            .inner
            .iter()
            .map(|ib| {
                inner_term(ProgramId::P1, &pt.e0, &pt.g0, &b.e, &b.q0, &b.p0, &ib.f, &ib.q, &ib.p, &ib.h)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut nb = b.clone();
        if let Some(j) = first_max(&values) {
            nb.inner = vec![b.inner[j].clone(); b.inner.len()];
        }
        out.push(nb);
    }
    Ok(StructuredPoint { family: StructuredFamily::P1(out), ..pt.clone() })
}

/// Copies the outer block with the largest block value (first one on ties)
/// over all the others.
pub fn symmetrize_p2(pt: &StructuredPoint) -> Result<StructuredPoint, NlpError> {
    pt.expect(ProgramId::P2)?;
    let StructuredFamily::P2(blocks) = &pt.family else { unreachable!() };
    let values = blocks
        .iter()
        .map(|b| p2_block_value(&pt.e0, &pt.g0, b))
        .collect::<Result<Vec<_>, _>>()?;
    let out = match first_max(&values) {
        Some(i) => vec![blocks[i].clone(); blocks.len()],
        None => Vec::new(),
    };
    Ok(StructuredPoint { family: StructuredFamily::P2(out), ..pt.clone() })
}

/// Keeps the first inner block of every outer block and records the inner
/// count as `r = R_i * atom`. A block without inner blocks gets upper-bound
/// placeholders, which the zero `r` multiplies away.
pub fn p1_to_p2(pt: &StructuredPoint) -> Result<StructuredPoint, NlpError> {
    pt.expect(ProgramId::P1)?;
    let StructuredFamily::P1(blocks) = &pt.family else { unreachable!() };
    let out = blocks
        .iter()
        .map(|b| {
            let ib = b.inner.first().cloned().unwrap_or_else(|| InnerBlock {
                f: b.y_prime.clone(),
                q: b.e.clone(),
                p: b.q0.clone(),
                h: b.p0.clone(),
            });
            P2Block {
                y_prime: b.y_prime.clone(),
                e: b.e.clone(),
                q0: b.q0.clone(),
                p0: b.p0.clone(),
                f: ib.f,
                q: ib.q,
                p: ib.p,
                h: ib.h,
                r: count(b.inner.len()) * &pt.atom,
            }
        })
        .collect();
    Ok(StructuredPoint { family: StructuredFamily::P2(out), ..pt.clone() })
}

/// The `P3` point built from the first outer block, with `r0 = R0 * atom`.
/// Without blocks, every remaining variable sits at its upper bound and
/// `r = r0 = 0`.
pub fn p2_to_p3(pt: &StructuredPoint) -> Result<ScalarPoint, NlpError> {
    pt.expect(ProgramId::P2)?;
    let StructuredFamily::P2(blocks) = &pt.family else { unreachable!() };
    let r0 = count(blocks.len()) * &pt.atom;
    let base = pt.base().with(Var::R0, r0);
    Ok(match blocks.first() {
        Some(b) => pt
            .block_point(&b.y_prime, &b.e, &b.q0, &b.p0)
            .with(Var::R0, count(blocks.len()) * &pt.atom)
            .with(Var::F, b.f.clone())
            .with(Var::Q, b.q.clone())
            .with(Var::P, b.p.clone())
            .with(Var::H, b.h.clone())
            .with(Var::R, b.r.clone()),
        None => base
            .with(Var::YPrime, k(1))
            .with(Var::E, pt.x.clone())
            .with(Var::F, k(1))
            .with(Var::Q0, pt.e0.clone())
            .with(Var::Q, pt.x.clone())
            .with(Var::P0, pt.g0.clone())
            .with(Var::P, pt.e0.clone())
            .with(Var::H, pt.g0.clone())
            .with(Var::R, Rational::zero()),
    })
}

/// The `P1` point of a graph at the ordered 4-clique `o`, together with
/// `d = 1 - δ(g)/n`. Blocks follow `R = N(o)` in increasing vertex order and
/// inner blocks follow `N(y) ∩ R` likewise.
pub fn graph_to_p1_point(g: &Graph, o: &OrderedClique) -> Result<(StructuredPoint, Rational), GraphError> {
    if o.len() != 4 {
        return Err(GraphError::InvalidCliqueSize(o.len()));
    }
    let v = o.vertices();
    let (x1, x2, x3) = (v[0], v[1], v[2]);
    let den = |s: &[usize]| g.density_hat_of(s);
    let r = g.common_neighbors_of(v);
    let mut blocks = Vec::with_capacity(r.len());
    for y in r.iter() {
        let inner = r
            .iter()
            .filter(|&z| g.has_edge(y, z))
            .map(|z| InnerBlock {
                f: den(&[y, z]),
                q: den(&[x1, y, z]),
                p: den(&[x1, x2, y, z]),
                h: den(&[x1, x2, x3, y, z]),
            })
            .collect();
        blocks.push(P1Block {
            y_prime: den(&[y]),
            e: den(&[x1, y]),
            q0: den(&[x1, x2, y]),
            p0: den(&[x1, x2, x3, y]),
            inner,
        });
    }
    let n = g.n();
    let point = StructuredPoint {
        x: den(&[x1]),
        e0: den(&[x1, x2]),
        g0: den(&[x1, x2, x3]),
        atom: Rational::new(BigInt::from(1), BigInt::from(n)),
        family: StructuredFamily::P1(blocks),
    };
    let d = k(1) - Rational::new(BigInt::from(g.min_degree()), BigInt::from(n));
    Ok((point, d))
}

/// Shape limits for [`sample_p1`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLimits {
    pub max_blocks: usize,
    pub max_inner: usize,
}

fn capped_count<R: Rng + ?Sized>(budget: &Rational, atom: &Rational, cap: usize, rng: &mut R) -> usize {
    let fit = (budget / atom).floor().to_integer().to_usize().unwrap_or(usize::MAX);
    rng.gen_range(0..=fit.min(cap))
}

/// A feasible `P1` point, every variable drawn from the sampling lattice inside its interval
/// and the block counts drawn up to both their caps.
pub fn sample_p1<R: Rng + ?Sized>(
    d: &Rational,
    atom: &Rational,
    limits: BlockLimits,
    resolution: u32,
    rng: &mut R,
) -> Result<StructuredPoint, NlpError> {
    let lattice = Lattice::new(d, resolution);
    let mut base = ScalarPoint::new();
    for var in [Var::X, Var::E0, Var::G0] {
        let (lo, hi) = interval(var, &base, d)?;
        base.set(var, lattice.pick(&lo, &hi, rng));
    }
    let g0 = base.req(Var::G0)?;
    let r0 = capped_count(&g0, atom, limits.max_blocks, rng);
    let mut blocks = Vec::with_capacity(r0);
    for _ in 0..r0 {
        let mut pt = base.clone();
        for var in [Var::YPrime, Var::E, Var::Q0, Var::P0] {
            let (lo, hi) = interval(var, &pt, d)?;
            pt.set(var, lattice.pick(&lo, &hi, rng));
        }
        let p0 = pt.req(Var::P0)?;
        let ri = capped_count(&p0, atom, limits.max_inner, rng);
        let mut inner = Vec::with_capacity(ri);
        for _ in 0..ri {
            let mut ip = pt.clone();
            for var in [Var::F, Var::Q, Var::P, Var::H] {
                let (lo, hi) = interval(var, &ip, d)?;
                ip.set(var, lattice.pick(&lo, &hi, rng));
            }
            inner.push(InnerBlock {
                f: ip.req(Var::F)?,
                q: ip.req(Var::Q)?,
                p: ip.req(Var::P)?,
                h: ip.req(Var::H)?,
            });
        }
        blocks.push(P1Block {
            y_prime: pt.req(Var::YPrime)?,
            e: pt.req(Var::E)?,
            q0: pt.req(Var::Q0)?,
            p0,
            inner,
        });
    }
    Ok(StructuredPoint {
        x: base.req(Var::X)?,
        e0: base.req(Var::E0)?,
        g0,
        atom: atom.clone(),
        family: StructuredFamily::P1(blocks),
    })
}

/// A feasible `P2` point: a sampled `P1` point whose first inner block per
/// outer block is kept and whose `r_i` is redrawn from the lattice over `[0, p_i0]`.
pub fn sample_p2<R: Rng + ?Sized>(
    d: &Rational,
    atom: &Rational,
    limits: BlockLimits,
    resolution: u32,
    rng: &mut R,
) -> Result<StructuredPoint, NlpError> {
    let limits = BlockLimits { max_inner: limits.max_inner.max(1), ..limits };
    let p1 = sample_p1(d, atom, limits, resolution, rng)?;
    let mut p2 = p1_to_p2(&p1)?;
    let lattice = Lattice::new(d, resolution);
    if let StructuredFamily::P2(blocks) = &mut p2.family {
        for b in blocks {
            b.r = lattice.pick(&Rational::zero(), &b.p0, rng);
        }
    }
    Ok(p2)
}
