use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::tables::DiagnosisIcd;

/// Default primary-diagnosis patterns: intracerebral haemorrhage, ischaemic
/// stroke and status epilepticus.
pub const NEURO_PATTERNS: [&str; 3] = ["I61%", "I63%", "G41%"];

/// SQL `LIKE` matching with `%` (any run) and `_` (any single character).
pub fn like(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0usize, 0usize);
    let mut star: Option<usize> = None;
    let mut mark = 0usize;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '_' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '%' {
            star = Some(pi);
            mark = ti;
            pi += 1;
        } else if let Some(s) = star {
            pi = s + 1;
            mark += 1;
            ti = mark;
        } else {
            return false;
        }
    }
    while pi < p.len() && p[pi] == '%' {
        pi += 1;
    }
    pi == p.len()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeuroFilter {
    pub patterns: Vec<String>,
}

impl Default for NeuroFilter {
    fn default() -> Self {
        NeuroFilter {
            patterns: NEURO_PATTERNS.iter().map(|p| p.to_string()).collect(),
        }
    }
}

impl NeuroFilter {
    pub fn matches(&self, icd_code: &str) -> bool {
        let code = icd_code.trim();
        self.patterns.iter().any(|p| like(p, code))
    }

    /// Admissions whose primary diagnosis (`seq_num = 1`) matches a pattern.
    pub fn select(&self, diagnoses: &[DiagnosisIcd]) -> BTreeSet<i64> {
        diagnoses
            .iter()
            .filter(|d| d.seq_num == 1 && self.matches(&d.icd_code))
            .map(|d| d.hadm_id)
            .collect()
    }
}

/// Admissions with an I61/I63/G41 primary diagnosis.
pub fn filter_neuro_admissions(diagnoses: &[DiagnosisIcd]) -> BTreeSet<i64> {
    NeuroFilter::default().select(diagnoses)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dx(hadm_id: i64, seq_num: i64, code: &str) -> DiagnosisIcd {
        DiagnosisIcd {
            hadm_id,
            seq_num,
            icd_code: code.to_string(),
            icd_version: 10,
        }
    }

    #[test]
    fn like_semantics() {
        assert!(like("I61%", "I619"));
        assert!(like("I61%", "I61"));
        assert!(!like("I61%", "I6"));
        assert!(!like("I61%", "XI619"));
        assert!(like("%9", "I619"));
        assert!(like("I6_9", "I619"));
        assert!(!like("I6_9", "I6199"));
    }

    #[test]
    fn primary_diagnosis_rule() {
        let d = [dx(1, 1, "I619"), dx(2, 1, "E11"), dx(2, 2, "I61")];
        let sel = filter_neuro_admissions(&d);
        assert!(sel.contains(&1));
        assert!(!sel.contains(&2));
    }

    #[test]
    fn three_of_four_primaries() {
        let d = [dx(1, 1, "I630"), dx(2, 1, "G419"), dx(3, 1, "I619"), dx(4, 1, "I10")];
        let sel = filter_neuro_admissions(&d);
        assert_eq!(sel.into_iter().collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn empty_input() {
        assert!(filter_neuro_admissions(&[]).is_empty());
    }
}
