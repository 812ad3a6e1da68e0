//! The pinning substitutions that remove variables between programs.

use num_traits::One;

use super::{NlpError, ProgramId, ScalarPoint, Var};
use crate::rational::Rational;

/// `pt` with the variables that `p`'s successor eliminates set to their
/// pinned values; still a point of `p`.
///
/// * `P4`: `r = p0`, `r0 = g0`, `h = p0 + q - e`, `p = q0 + f - y'`
/// * `P5`: `p0 = g0 + e - x`, `q0 = e0 + e - x`
/// * `P8`: `e = x + y' - 1`
/// * `P9`: `y' = 1 - d`
/// * `P10`: `x = 1 - d`
pub fn pinned_point(p: ProgramId, pt: &ScalarPoint, d: &Rational) -> Result<ScalarPoint, NlpError> {
    use Var::*;
    let g = |v| pt.req(v);
    let mut out = pt.restrict(p);
    match p {
        ProgramId::P4 => {
            out.set(R, g(P0)?);
            out.set(R0, g(G0)?);
            out.set(H, g(P0)? + g(Q)? - g(E)?);
            out.set(P, g(Q0)? + g(F)? - g(YPrime)?);
        }
        ProgramId::P5 => {
            out.set(P0, g(G0)? + g(E)? - g(X)?);
            out.set(Q0, g(E0)? + g(E)? - g(X)?);
        }
        ProgramId::P8 => out.set(E, g(X)? + g(YPrime)? - Rational::one()),
        ProgramId::P9 => out.set(YPrime, Rational::one() - d),
        ProgramId::P10 => out.set(X, Rational::one() - d),
        _ => return Err(NlpError::NoSubstitution(p)),
    }
    for &v in p.variables() {
        pt.req(v)?;
    }
    Ok(out)
}

/// The successor-program point obtained by pinning, restricted to the
/// successor's variables. From `P8` the result is written in the `(a, b)`
/// coordinates `a = x - e0`, `b = y' - f`.
pub fn reduce_point(p: ProgramId, pt: &ScalarPoint, d: &Rational) -> Result<ScalarPoint, NlpError> {
    let pinned = pinned_point(p, pt, d)?;
    let next = p.successor().ok_or(NlpError::NoSubstitution(p))?;
    if p == ProgramId::P8 {
        let g = |v| pinned.req(v);
        return Ok(ScalarPoint::from_pairs([
            (Var::X, g(Var::X)?),
            (Var::YPrime, g(Var::YPrime)?),
            (Var::A, g(Var::X)? - g(Var::E0)?),
            (Var::B, g(Var::YPrime)? - g(Var::F)?),
        ]));
    }
    Ok(pinned.restrict(next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::{domain_check_scalar, objectives, sample_point};
    use crate::rational::{int, ratio};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reduced_points_are_feasible_and_do_not_decrease() {
        let d = ratio(2, 33);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in [ProgramId::P4, ProgramId::P5, ProgramId::P8, ProgramId::P9, ProgramId::P10] {
            let next = p.successor().unwrap();
            for _ in 0..40 {
                let pt = sample_point(p, &d, 32, &mut rng).unwrap();
                let red = reduce_point(p, &pt, &d).unwrap();
                assert!(domain_check_scalar(next, &red, &d).unwrap().is_empty(), "{p}: {red}");
                let pinned = pinned_point(p, &pt, &d).unwrap();
                assert!(domain_check_scalar(p, &pinned, &d).unwrap().is_empty(), "{p}: {pinned}");
                let before = objectives::eval_scalar(p, &pt, &d).unwrap();
                let after = objectives::eval_scalar(next, &red, &d).unwrap();
                assert!(after >= before, "{p}: {pt}");
            }
        }
    }

    #[test]
    fn pinned_y_prime_is_a_fixed_point() {
        let d = ratio(2, 33);
        let pt = ScalarPoint::from_pairs([
            (Var::X, ratio(32, 33)),
            (Var::YPrime, int(1) - &d),
            (Var::A, ratio(1, 33)),
            (Var::B, int(0)),
        ]);
        assert_eq!(pinned_point(ProgramId::P9, &pt, &d).unwrap(), pt);
    }

    #[test]
    fn majorization_steps_have_no_substitution() {
        let d = ratio(2, 33);
        for p in [ProgramId::P1, ProgramId::P2, ProgramId::P3, ProgramId::P6, ProgramId::P7, ProgramId::P11] {
            assert_eq!(
                reduce_point(p, &ScalarPoint::new(), &d),
                Err(NlpError::NoSubstitution(p))
            );
        }
    }
}
