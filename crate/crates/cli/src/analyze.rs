use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use hadswitch::invariants::{binary_code_summary, hadamard_smith_form};
use hadswitch::structure::{count_closed_quadruples, find_hall_sets, type_histogram, Axis};
use hadswitch::{BinaryCodeSummary, HadamardMatrix};

/// Type histograms are skipped above this order.
const HISTOGRAM_MAX_ORDER: usize = 28;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analysis {
    pub order: usize,
    pub closed_quadruples: AxisCounts,
    pub hall_sets: AxisCounts,
    /// `r -> count`, rows then columns; absent above order 28.
    pub type_histogram: Option<[BTreeMap<usize, usize>; 2]>,
    /// Distinct invariant factors with their multiplicities, ascending.
    pub smith_factors: Vec<(u64, usize)>,
    pub smith_alpha: Option<usize>,
    pub row_code: BinaryCodeSummary,
    pub column_code: BinaryCodeSummary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisCounts {
    pub rows: usize,
    pub columns: usize,
}

pub fn analyze(m: &HadamardMatrix) -> Analysis {
    let n = m.order();
    let both = |f: &dyn Fn(Axis) -> usize| AxisCounts { rows: f(Axis::Rows), columns: f(Axis::Columns) };
    let snf = hadamard_smith_form(m);
    let mut smith_factors: Vec<(u64, usize)> = Vec::new();
    for f in snf.factors_u64().expect("factors of a Hadamard matrix divide its order") {
        match smith_factors.last_mut() {
            Some((v, c)) if *v == f => *c += 1,
            _ => smith_factors.push((f, 1)),
        }
    }
    Analysis {
        order: n,
        closed_quadruples: both(&|a| count_closed_quadruples(m, a)),
        hall_sets: both(&|a| find_hall_sets(m, a).len()),
        type_histogram: (n % 4 == 0 && n <= HISTOGRAM_MAX_ORDER).then(|| [type_histogram(m, Axis::Rows), type_histogram(m, Axis::Columns)]),
        smith_factors,
        smith_alpha: snf.smith_alpha,
        row_code: binary_code_summary(m, Axis::Rows),
        column_code: binary_code_summary(m, Axis::Columns),
    }
}

fn code_line(name: &str, c: &BinaryCodeSummary) -> String {
    let mut s = format!(
        "{name} code: dimension {}, self-orthogonal {}, self-dual {}, weight-4 words {}\n",
        c.dimension, c.self_orthogonal, c.self_dual, c.weight4_count
    );
    if let Some(we) = &c.weight_enumerator {
        let terms: Vec<String> = we.iter().map(|(w, k)| format!("{w}:{k}")).collect();
        s.push_str(&format!("{name} weight enumerator: {}\n", terms.join(" ")));
    }
    s
}

impl Analysis {
    pub fn to_text(&self) -> String {
        let mut s = format!("order {}\n", self.order);
        s.push_str(&format!(
            "closed quadruples: rows {}, columns {}\n",
            self.closed_quadruples.rows, self.closed_quadruples.columns
        ));
        s.push_str(&format!("Hall sets: rows {}, columns {}\n", self.hall_sets.rows, self.hall_sets.columns));
        if let Some([rows, cols]) = &self.type_histogram {
            let fmt = |h: &BTreeMap<usize, usize>| h.iter().map(|(r, c)| format!("{r}:{c}")).collect::<Vec<_>>().join(" ");
            s.push_str(&format!("type histogram rows: {}\n", fmt(rows)));
            s.push_str(&format!("type histogram columns: {}\n", fmt(cols)));
        }
        let snf: Vec<String> = self.smith_factors.iter().map(|(v, c)| format!("{v}^{c}")).collect();
        s.push_str(&format!("Smith normal form: {}\n", snf.join(" ")));
        if let Some(a) = self.smith_alpha {
            s.push_str(&format!("Smith class alpha: {a}\n"));
        }
        s.push_str(&code_line("row", &self.row_code));
        s.push_str(&code_line("column", &self.column_code));
        s
    }
}
