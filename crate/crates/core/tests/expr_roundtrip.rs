//! Randomized print/parse round-trips for the expression language.

use lingrow::expr::{BinOp, Expr, Func, Var};

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Random tree over the parser-reachable constructors: literals are kept
/// non-negative (the parser produces unary minus nodes, never negative
/// literals).
fn random_expr(rng: &mut Lcg, depth: usize) -> Expr {
    if depth == 0 || rng.next() < 0.3 {
        return if rng.next() < 0.5 {
            Expr::Num((rng.next() * 100.0 * 8.0).round() / 8.0)
        } else {
            match (rng.next() * 3.0) as usize {
                0 => Expr::Var(Var::T),
                1 => Expr::Var(Var::X(0)),
                _ => Expr::Var(Var::X(1)),
            }
        };
    }
    match (rng.next() * 8.0) as usize {
        0 => Expr::Neg(Box::new(random_expr(rng, depth - 1))),
        1..=4 => {
            let op = match (rng.next() * 5.0) as usize {
                0 => BinOp::Add,
                1 => BinOp::Sub,
                2 => BinOp::Mul,
                3 => BinOp::Div,
                _ => BinOp::Pow,
            };
            Expr::Bin(
                op,
                Box::new(random_expr(rng, depth - 1)),
                Box::new(random_expr(rng, depth - 1)),
            )
        }
        _ => {
            let (f, arity) = match (rng.next() * 10.0) as usize {
                0 => (Func::Sin, 1),
                1 => (Func::Cos, 1),
                2 => (Func::Exp, 1),
                3 => (Func::Log, 1),
                4 => (Func::Sqrt, 1),
                5 => (Func::Abs, 1),
                6 => (Func::Tanh, 1),
                7 => (Func::Min, 2),
                8 => (Func::Max, 2),
                _ => (Func::Pow, 2),
            };
            let args = (0..arity).map(|_| random_expr(rng, depth - 1)).collect();
            Expr::Call(f, args)
        }
    }
}

#[test]
fn thousand_random_trees_round_trip() {
    let mut rng = Lcg(0xE59);
    for case in 0..1000 {
        let tree = random_expr(&mut rng, 4);
        let printed = tree.print();
        let reparsed = Expr::parse(&printed)
            .unwrap_or_else(|e| panic!("case {case}: `{printed}` failed to parse: {e}"));
        assert_eq!(tree, reparsed, "case {case}: `{printed}`");

        // Evaluate both at a few bindings; results must be identical
        // (bitwise) or both be domain errors.
        for (t, x1, x2) in [(0.5, 1.25, -0.75), (2.0, 0.0, 3.5), (0.1, -2.0, 0.5)] {
            let a = tree.eval(Some(t), &[x1, x2]);
            let b = reparsed.eval(Some(t), &[x1, x2]);
            match (a, b) {
                (Ok(va), Ok(vb)) => assert!(
                    va.to_bits() == vb.to_bits(),
                    "case {case}: {va} vs {vb} for `{printed}`"
                ),
                (Err(_), Err(_)) => {}
                (a, b) => panic!("case {case}: eval disagreement {a:?} vs {b:?}"),
            }
        }
    }
}

#[test]
fn fixpoint_of_printed_form() {
    // parse . print . parse is the identity on parser output.
    let mut rng = Lcg(0x715);
    for _ in 0..200 {
        let tree = random_expr(&mut rng, 3);
        let once = Expr::parse(&tree.print()).unwrap();
        let twice = Expr::parse(&once.print()).unwrap();
        assert_eq!(once, twice);
    }
}
