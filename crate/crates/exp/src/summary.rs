use felix_core::dynamics::StepRecord;

/// Population averages of one trajectory step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub t: usize,
    pub mean_s: f64,
    pub mean_pi: f64,
    /// Population standard deviation.
    pub std_pi: f64,
    pub mean_q: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn summarize_step(r: &StepRecord) -> SummaryRow {
    let mean_pi = mean(&r.payoffs);
    let var = r.payoffs.iter().map(|p| (p - mean_pi).powi(2)).sum::<f64>() / r.payoffs.len() as f64;
    SummaryRow {
        t: r.t,
        mean_s: mean(&r.s),
        mean_pi,
        std_pi: var.sqrt(),
        mean_q: mean(&r.q),
    }
}

pub fn summarize(records: &[StepRecord]) -> Vec<SummaryRow> {
    records.iter().map(summarize_step).collect()
}
