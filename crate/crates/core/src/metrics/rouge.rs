//! ROUGE-L (LCS-based F-measure).

pub const BETA: f64 = 1.2;

/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev = vec![0usize; short.len() + 1];
    let mut cur = vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

pub fn rouge_l_f(candidate: &[String], reference: &[String]) -> f64 {
    let lcs = lcs_len(candidate, reference);
    if lcs == 0 {
        return 0.0;
    }
    let recall = lcs as f64 / reference.len() as f64;
    let precision = lcs as f64 / candidate.len() as f64;
    let b2 = BETA * BETA;
    let denom = recall + b2 * precision;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * recall * precision / denom
    }
}

/// Best F over the references.
pub fn rouge_l_pair(candidate: &[String], references: &[Vec<String>]) -> f64 {
    references
        .iter()
        .map(|r| rouge_l_f(candidate, r))
        .fold(0.0, f64::max)
}
