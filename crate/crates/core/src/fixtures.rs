//! Small reference networks used by tests, examples and the CLI.

use crate::network::{Bank, Cds, Debt, FinancialNetwork};

/// A degenerate network (no external assets at `B` and `C`, which write only
/// CDSs) that has no clearing recovery vector:
///
/// * `r_A = min(1, 2 (1 - r_B))`
/// * `r_B = 1` if `r_C = 1`, else `1/2`
/// * `r_C = 1` if `r_A = 1`, else `0`
///
/// Bank order is `A, B, C, s, t`.
pub fn no_clearing() -> FinancialNetwork {
    let (a, b, c, s, t) = (0, 1, 2, 3, 4);
    FinancialNetwork::new(
        vec![
            Bank::new("A", 0.0),
            Bank::new("B", 0.0),
            Bank::new("C", 0.0),
            Bank::new("s", 8.0),
            Bank::new("t", 1.0),
        ],
        vec![
            Debt { writer: a, holder: t, notional: 1.0 },
            Debt { writer: s, holder: t, notional: 1.0 },
        ],
        vec![
            // A is paid 2 (1 - r_B)
            Cds { writer: s, holder: a, reference: b, notional: 2.0 },
            // B receives (1 - r_C) and owes 2 (1 - r_C)
            Cds { writer: s, holder: b, reference: c, notional: 1.0 },
            Cds { writer: b, holder: t, reference: c, notional: 2.0 },
            // C owes (1 - r_A) and holds nothing
            Cds { writer: c, holder: t, reference: a, notional: 1.0 },
        ],
        1.0,
        1.0,
    )
    .expect("fixture network is valid")
}
