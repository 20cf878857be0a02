//! Signed two-group gaps from published rates, with exact rational arithmetic.
use emaudit::audit::{pair_gap, DisparityOp};
use emaudit::measures::Direction;
use num_rational::Ratio;

fn main() {
    let cents = |x: i64| Ratio::new(x, 100);
    // (matcher, measure, protected rate, other rate, direction)
    let rows = [
        ("Ditto", "TPR", 59, 85, Direction::HigherBetter),
        ("DeepMatcher", "TPR", 48, 72, Direction::HigherBetter),
        ("NbMatcher", "PPV", 3, 58, Direction::HigherBetter),
        ("MCAN", "FDR", 19, 5, Direction::LowerBetter),
    ];
    println!("{:<12} {:<4} {:>7} {:>7} flagged(div>0.2)", "matcher", "rate", "sub", "div");
    for (name, m, p, o, dir) in rows {
        let sub = pair_gap(cents(p), cents(o), dir, DisparityOp::Sub).unwrap();
        let div = pair_gap(cents(p), cents(o), dir, DisparityOp::Div).unwrap();
        let f = |q: Ratio<i64>| *q.numer() as f64 / *q.denom() as f64;
        println!("{name:<12} {m:<4} {:>7.2} {:>7.2} {}", f(sub), f(div), f(div) > 0.2);
    }
}
