//! Exact maximization of `(1-p)·a + p·b` over a partition of `[0,1]`.
//!
//! Within one cell the successor values `a` (outcome 0) and `b` (outcome 1)
//! are constant, so the objective is linear in `p` and its supremum over the
//! cell is its value at one of the cell's two endpoints. At an open end the
//! endpoint value is only a one-sided limit; for closed-box events it never
//! exceeds the value the neighbouring closed cell attains at the same point,
//! so the overall supremum is attained.

use num_traits::One;

use crate::events::Cell;
use crate::rational::Rational;

pub fn mix(p: &Rational, if_zero: &Rational, if_one: &Rational) -> Rational {
    (Rational::one() - p) * if_zero + p * if_one
}

/// Supremum and the smallest forecast attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellMax {
    pub value: Rational,
    pub argmax: Rational,
    pub cell: usize,
}

/// `children[i]` holds the successor values `(a, b)` for `cells[i]`.
pub fn maximize(cells: &[Cell], children: &[(Rational, Rational)]) -> CellMax {
    assert_eq!(cells.len(), children.len(), "one value pair per cell");
    assert!(!cells.is_empty(), "a partition has at least one cell");
    let endpoint_values: Vec<(Rational, Rational)> = cells
        .iter()
        .zip(children)
        .map(|(cell, (a, b))| (mix(&cell.lo, a, b), mix(&cell.hi, a, b)))
        .collect();
    let sup = endpoint_values
        .iter()
        .flat_map(|(lo, hi)| [lo, hi])
        .max()
        .expect("non-empty")
        .clone();

    // Scan left to right for the first point that attains the supremum.
    for (i, (cell, (at_lo, at_hi))) in cells.iter().zip(&endpoint_values).enumerate() {
        if cell.lo_closed && *at_lo == sup {
            return CellMax { value: sup, argmax: cell.lo.clone(), cell: i };
        }
        if *at_lo == sup && *at_hi == sup && !cell.is_point() {
            // Constant on an open-left cell: every interior point attains it.
            // Unreachable for closed-box events, where the closed neighbour
            // on the left already attains the same value.
            return CellMax {
                value: sup,
                argmax: cell.representative().into_inner(),
                cell: i,
            };
        }
        if cell.hi_closed && *at_hi == sup {
            return CellMax { value: sup, argmax: cell.hi.clone(), cell: i };
        }
    }
    unreachable!("the supremum is one of the endpoint values")
}
