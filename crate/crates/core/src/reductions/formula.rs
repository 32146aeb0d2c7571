//! Cubic monotone 3-clause formulas and their one-in-three models.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Largest variable count the brute-force model oracle accepts.
pub const MODEL_ORACLE_LIMIT: usize = 24;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("clause {clause} repeats a variable")]
    RepeatedVariable { clause: usize },
    #[error("clause {clause} uses variable {variable}, outside 0..{m}")]
    VariableOutOfRange {
        clause: usize,
        variable: u32,
        m: usize,
    },
    #[error("clauses {first} and {second} are equal")]
    DuplicateClause { first: usize, second: usize },
    #[error("variable {variable} occurs in {count} clauses instead of 3")]
    Occurrences { variable: u32, count: usize },
    #[error("{0} variables exceed the model oracle limit of {MODEL_ORACLE_LIMIT}")]
    TooLarge(usize),
    #[error("formula was built without validation")]
    Unchecked,
}

/// A set of `m` clauses, each three distinct positive variables. A
/// validated formula has every variable `0..m` in exactly three clauses and
/// pairwise distinct clauses. Clauses are stored sorted: `[a, b, c]` with
/// `a < b < c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicMonotoneFormula {
    clauses: Vec<[u32; 3]>,
    checked: bool,
}

impl CubicMonotoneFormula {
    /// Validates the cubic monotone shape.
    pub fn new(clauses: Vec<[u32; 3]>) -> Result<Self, FormulaError> {
        let formula = Self::new_unchecked(clauses)?;
        let m = formula.m();
        let mut seen: HashMap<[u32; 3], usize> = HashMap::new();
        let mut count = vec![0usize; m];
        for (i, clause) in formula.clauses.iter().enumerate() {
            if let Some(&first) = seen.get(clause) {
                return Err(FormulaError::DuplicateClause { first, second: i });
            }
            seen.insert(*clause, i);
            for &v in clause {
                if v as usize >= m {
                    return Err(FormulaError::VariableOutOfRange {
                        clause: i,
                        variable: v,
                        m,
                    });
                }
                count[v as usize] += 1;
            }
        }
        if let Some((v, &c)) = count.iter().enumerate().find(|(_, &c)| c != 3) {
            return Err(FormulaError::Occurrences {
                variable: v as u32,
                count: c,
            });
        }
        Ok(CubicMonotoneFormula {
            checked: true,
            ..formula
        })
    }

    /// Scaffolding formulas for gadget tests: only requires three distinct
    /// variables per clause.
    pub fn new_unchecked(clauses: Vec<[u32; 3]>) -> Result<Self, FormulaError> {
        let mut sorted = Vec::with_capacity(clauses.len());
        for (i, mut clause) in clauses.into_iter().enumerate() {
            clause.sort_unstable();
            if clause[0] == clause[1] || clause[1] == clause[2] {
                return Err(FormulaError::RepeatedVariable { clause: i });
            }
            sorted.push(clause);
        }
        Ok(CubicMonotoneFormula {
            clauses: sorted,
            checked: false,
        })
    }

    /// Number of clauses.
    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[[u32; 3]] {
        &self.clauses
    }

    pub fn is_checked(&self) -> bool {
        self.checked
    }

    /// One more than the largest variable index used (`m` when validated).
    pub fn variable_count(&self) -> usize {
        self.clauses
            .iter()
            .flatten()
            .map(|&v| v as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// Indices of the clauses containing `variable`, ascending.
    pub fn clauses_of(&self, variable: u32) -> Vec<usize> {
        (0..self.m())
            .filter(|&i| self.clauses[i].contains(&variable))
            .collect()
    }

    /// Whether `model` meets every clause exactly once.
    pub fn is_model(&self, model: &OneInThreeModel) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().filter(|v| model.contains(**v)).count() == 1)
    }

    /// The `.cnf3` rendering.
    pub fn to_cnf3(&self) -> String {
        crate::io::serialize_cnf3(&self.clauses)
    }
}

/// A set of variables, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct OneInThreeModel {
    variables: Vec<u32>,
}

impl OneInThreeModel {
    pub fn new(mut variables: Vec<u32>) -> Self {
        variables.sort_unstable();
        variables.dedup();
        OneInThreeModel { variables }
    }

    pub fn variables(&self) -> &[u32] {
        &self.variables
    }

    pub fn contains(&self, v: u32) -> bool {
        self.variables.binary_search(&v).is_ok()
    }
}

impl fmt::Display for OneInThreeModel {
    /// `{X0, X4}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.variables.iter().map(|v| format!("X{v}")).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

/// Every one-in-three model of a validated formula, by exhaustive search
/// over all variable subsets, in ascending order of their bitmask.
pub fn find_one_in_three_models(
    formula: &CubicMonotoneFormula,
) -> Result<Vec<OneInThreeModel>, FormulaError> {
    if !formula.is_checked() {
        return Err(FormulaError::Unchecked);
    }
    let n = formula.variable_count();
    if n > MODEL_ORACLE_LIMIT {
        return Err(FormulaError::TooLarge(n));
    }
    let masks: Vec<u32> = formula
        .clauses()
        .iter()
        .map(|c| c.iter().fold(0u32, |acc, &v| acc | (1 << v)))
        .collect();
    let models = (0u32..1 << n)
        .filter(|&subset| masks.iter().all(|&c| (c & subset).count_ones() == 1))
        .map(|subset| {
            OneInThreeModel::new((0..n as u32).filter(|v| subset & (1 << v) != 0).collect())
        })
        .collect();
    Ok(models)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn phi6() -> CubicMonotoneFormula {
        CubicMonotoneFormula::new(vec![
            [0, 1, 2],
            [0, 1, 3],
            [0, 2, 3],
            [1, 4, 5],
            [2, 4, 5],
            [3, 4, 5],
        ])
        .unwrap()
    }

    fn complete4() -> CubicMonotoneFormula {
        CubicMonotoneFormula::new(vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]).unwrap()
    }

    #[test]
    fn complete_four_clause_formula_has_no_model() {
        assert!(find_one_in_three_models(&complete4()).unwrap().is_empty());
    }

    #[test]
    fn six_clause_formula_has_model_0_4() {
        let models = find_one_in_three_models(&phi6()).unwrap();
        assert!(models.contains(&OneInThreeModel::new(vec![0, 4])));
        for model in &models {
            assert!(phi6().is_model(model));
        }
    }

    #[test]
    fn empty_formula_has_empty_model() {
        let empty = CubicMonotoneFormula::new(vec![]).unwrap();
        assert_eq!(
            find_one_in_three_models(&empty).unwrap(),
            vec![OneInThreeModel::default()]
        );
    }

    #[test]
    fn oracle_matches_direct_check_on_all_subsets() {
        let phi = phi6();
        let models = find_one_in_three_models(&phi).unwrap();
        let mut direct = Vec::new();
        for subset in 0u32..64 {
            let m = OneInThreeModel::new((0..6).filter(|v| subset >> v & 1 == 1).collect());
            if phi.is_model(&m) {
                direct.push(m);
            }
        }
        assert_eq!(models, direct);
    }

    #[test]
    fn validation_errors() {
        assert_eq!(
            CubicMonotoneFormula::new(vec![[0, 0, 1]]),
            Err(FormulaError::RepeatedVariable { clause: 0 })
        );
        assert!(matches!(
            CubicMonotoneFormula::new(vec![[0, 1, 2]]),
            Err(FormulaError::VariableOutOfRange { .. })
        ));
        assert!(matches!(
            CubicMonotoneFormula::new(vec![[0, 1, 2], [2, 1, 0], [0, 1, 2]]),
            Err(FormulaError::DuplicateClause {
                first: 0,
                second: 1
            })
        ));
        assert!(matches!(
            CubicMonotoneFormula::new(vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 4], [2, 3, 4]]),
            Err(FormulaError::Occurrences { .. })
        ));
        let scaffold = CubicMonotoneFormula::new_unchecked(vec![[2, 0, 1]]).unwrap();
        assert_eq!(scaffold.clauses(), &[[0, 1, 2]]);
        assert_eq!(
            find_one_in_three_models(&scaffold),
            Err(FormulaError::Unchecked)
        );
    }

    #[test]
    fn model_display() {
        assert_eq!(OneInThreeModel::new(vec![4, 0]).to_string(), "{X0, X4}");
    }
}
