//! Built-in XOR data and the three reference architectures.
//!
//! Units 0 and 1 are the XOR inputs, unit 2 the output, unit 3 the hidden
//! unit. `2A` connects the inputs straight to the output; `2B` adds the
//! hidden unit between them; `2C` also feeds every visible unit from the
//! other units, so nothing is designated as input.

use crate::constraints::{Dataset, HiddenAssignment};
use crate::formats::{parse_dataset, parse_topology};
use crate::model::{ParamId, ParameterVector, Topology};
use crate::rational::{ratio, rational_from_i64};

pub const FIG2A_TOPOLOGY: &str = include_str!("../fixtures/fig2a.top");
pub const FIG2B_TOPOLOGY: &str = include_str!("../fixtures/fig2b.top");
pub const FIG2C_TOPOLOGY: &str = include_str!("../fixtures/fig2c.top");
pub const XOR_DATA: &str = include_str!("../fixtures/xor.csv");
pub const REFERENCE_SOLUTION_JSON: &str = include_str!("../fixtures/fig2c_reference.json");

pub fn fig2a() -> Topology {
    parse_topology(FIG2A_TOPOLOGY).expect("bundled fixture parses")
}

pub fn fig2b() -> Topology {
    parse_topology(FIG2B_TOPOLOGY).expect("bundled fixture parses")
}

pub fn fig2c() -> Topology {
    parse_topology(FIG2C_TOPOLOGY).expect("bundled fixture parses")
}

/// `{000, 101, 011, 110}`: the third bit is the XOR of the first two.
pub fn xor_dataset() -> Dataset {
    parse_dataset(XOR_DATA).expect("bundled fixture parses")
}

/// Hidden unit computing AND of the inputs on the XOR samples.
pub fn and_column() -> HiddenAssignment {
    HiddenAssignment::from_bit_string("0001", 4, 1).expect("4 samples x 1 hidden unit")
}

/// Hand-built solution for the `2C` architecture with scale `C = 1`.
/// Its smallest margin is 1/4.
pub fn reference_solution() -> ParameterVector {
    let weight = |src, dst| ParamId::Weight { src, dst };
    let bias = |unit| ParamId::Bias { unit };
    let two = rational_from_i64(2);
    let four = rational_from_i64(4);
    let pairs = [
        (bias(0), rational_from_i64(-1)),
        (bias(1), rational_from_i64(-1)),
        (bias(2), rational_from_i64(-1)),
        (bias(3), rational_from_i64(-1)),
        (weight(0, 3), ratio(3, 4)),
        (weight(1, 3), ratio(3, 4)),
        (weight(2, 0), two.clone()),
        (weight(0, 2), two.clone()),
        (weight(1, 2), two.clone()),
        (weight(2, 1), two.clone()),
        (weight(0, 1), -two.clone()),
        (weight(1, 0), -two),
        (weight(3, 0), four.clone()),
        (weight(3, 1), four.clone()),
        (weight(3, 2), -four),
    ];
    ParameterVector::for_topology(&fig2c(), pairs).expect("covers every 2C parameter")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{witness_from_solution, SolutionFile};

    #[test]
    fn fixtures_have_expected_shape() {
        let a = fig2a();
        assert_eq!((a.num_visible(), a.num_hidden(), a.num_arcs()), (3, 0, 2));
        let b = fig2b();
        assert_eq!((b.num_visible(), b.num_hidden(), b.num_arcs()), (3, 1, 5));
        let c = fig2c();
        assert_eq!((c.num_visible(), c.num_hidden(), c.num_arcs()), (3, 1, 11));
        assert_eq!(c.constrained_units(), vec![0, 1, 2, 3]);
        assert!(c.has_arc(3, 2) && !c.has_arc(2, 3));
        let d = xor_dataset();
        assert_eq!((d.num_samples(), d.width()), (4, 3));
    }

    #[test]
    fn bundled_solution_file_matches() {
        let file: SolutionFile = serde_json::from_str(REFERENCE_SOLUTION_JSON).unwrap();
        let witness = witness_from_solution(&file, &fig2c(), &xor_dataset()).unwrap();
        assert_eq!(witness.params, reference_solution());
        assert_eq!(witness.hidden, and_column());
        assert_eq!(witness.margin, ratio(1, 4));
    }
}
