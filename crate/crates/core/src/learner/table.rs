use std::collections::HashMap;

use crate::grid::Action;
use crate::learner::quantize::ObsKey;

/// Sparse action-value table. Unseen keys read as 0.0.
#[derive(Debug, Clone, Default)]
pub struct ValueTable {
    rows: HashMap<ObsKey, [f64; Action::COUNT]>,
}

impl ValueTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &ObsKey, action: Action) -> f64 {
        self.rows.get(key).map_or(0.0, |r| r[action.index()])
    }

    pub fn row(&self, key: &ObsKey) -> [f64; Action::COUNT] {
        self.rows.get(key).copied().unwrap_or([0.0; Action::COUNT])
    }

    pub fn contains(&self, key: &ObsKey) -> bool {
        self.rows.contains_key(key)
    }

    pub fn set(&mut self, key: ObsKey, action: Action, value: f64) {
        self.rows.entry(key).or_insert([0.0; Action::COUNT])[action.index()] = value;
    }

    pub(crate) fn row_mut(&mut self, key: ObsKey) -> &mut [f64; Action::COUNT] {
        self.rows.entry(key).or_insert([0.0; Action::COUNT])
    }

    pub fn max_value(&self, key: &ObsKey) -> f64 {
        self.row(key).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First action attaining the row maximum.
    pub fn greedy_action(&self, key: &ObsKey) -> Action {
        greedy_index(&self.row(key))
    }

    /// Number of keys with a stored row.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Nonzero entries sorted by key then action.
    pub fn nonzero_entries(&self) -> Vec<(ObsKey, Action, f64)> {
        let mut keys: Vec<&ObsKey> = self.rows.keys().collect();
        keys.sort();
        keys.into_iter()
            .flat_map(|k| {
                let row = self.rows[k];
                Action::ALL
                    .into_iter()
                    .filter(move |a| row[a.index()] != 0.0)
                    .map(move |a| (*k, a, row[a.index()]))
            })
            .collect()
    }

    pub fn keys(&self) -> impl Iterator<Item = &ObsKey> {
        self.rows.keys()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.values().flat_map(|r| r.iter().copied())
    }
}

pub(crate) fn greedy_index(row: &[f64; Action::COUNT]) -> Action {
    let mut best = 0;
    for i in 1..Action::COUNT {
        if row[i] > row[best] {
            best = i;
        }
    }
    Action::ALL[best]
}

/// Entry-wise equality; a stored all-zero row equals an absent one.
impl PartialEq for ValueTable {
    fn eq(&self, other: &Self) -> bool {
        let covers = |a: &ValueTable, b: &ValueTable| {
            a.rows
                .iter()
                .all(|(k, row)| Action::ALL.iter().all(|act| b.get(k, *act) == row[act.index()]))
        };
        covers(self, other) && covers(other, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(v: u8) -> ObsKey {
        ObsKey::from_parts(&[v, 0, 1, 2]).unwrap()
    }

    #[test]
    fn unseen_reads_zero() {
        let t = ValueTable::new();
        assert_eq!(t.get(&key(3), Action::Forward), 0.0);
        assert_eq!(t.max_value(&key(3)), 0.0);
    }

    #[test]
    fn zero_rows_compare_equal_to_absent() {
        let mut a = ValueTable::new();
        a.set(key(1), Action::TurnLeft, 0.0);
        assert_eq!(a, ValueTable::new());
        a.set(key(1), Action::TurnLeft, -0.5);
        assert_ne!(a, ValueTable::new());
        assert_eq!(a.nonzero_entries(), vec![(key(1), Action::TurnLeft, -0.5)]);
    }

    #[test]
    fn greedy_prefers_first_on_ties() {
        let mut t = ValueTable::new();
        assert_eq!(t.greedy_action(&key(0)), Action::Forward);
        t.set(key(0), Action::TurnLeft, 1.0);
        t.set(key(0), Action::TurnRight, 1.0);
        assert_eq!(t.greedy_action(&key(0)), Action::TurnLeft);
    }
}
