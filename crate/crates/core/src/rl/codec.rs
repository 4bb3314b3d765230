//! Combinatorial action codec: every admissible elevator subset (sizes one
//! up to the configured maximum) gets one Q-output index.
//!
//! Canonical enumeration: all singletons in id order, then pairs in
//! lexicographic order, then triples; 6/21/41 actions for maxima of 1/2/3
//! with six carts.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("subset is empty")]
    Empty,
    #[error("subset size {got} exceeds maximum {max}")]
    TooLarge { got: usize, max: usize },
    #[error("elevator id {0} out of range")]
    OutOfRange(usize),
    #[error("action index {0} out of range")]
    BadIndex(usize),
}

#[derive(Debug, Clone)]
pub struct ActionCodec {
    num_elevators: usize,
    max_subset: usize,
    subsets: Vec<Vec<usize>>,
    index_of: BTreeMap<Vec<usize>, usize>,
}

impl ActionCodec {
    pub fn new(num_elevators: usize, max_subset: usize) -> Self {
        assert!(num_elevators >= 1);
        assert!((1..=num_elevators).contains(&max_subset));
        let mut subsets = Vec::new();
        for size in 1..=max_subset {
            let mut combo: Vec<usize> = (0..size).collect();
            loop {
                subsets.push(combo.clone());
                // next lexicographic combination of `size` out of n
                let mut i = size;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    if combo[i] != i + num_elevators - size {
                        combo[i] += 1;
                        for j in i + 1..size {
                            combo[j] = combo[j - 1] + 1;
                        }
                        break;
                    }
                    if i == 0 {
                        combo.clear();
                        break;
                    }
                }
                if combo.is_empty() {
                    break;
                }
            }
        }
        let index_of = subsets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Self {
            num_elevators,
            max_subset,
            subsets,
            index_of,
        }
    }

    pub fn num_actions(&self) -> usize {
        self.subsets.len()
    }

    pub fn max_subset(&self) -> usize {
        self.max_subset
    }

    pub fn num_elevators(&self) -> usize {
        self.num_elevators
    }

    pub fn decode(&self, index: usize) -> Result<&[usize], CodecError> {
        self.subsets
            .get(index)
            .map(Vec::as_slice)
            .ok_or(CodecError::BadIndex(index))
    }

    pub fn encode(&self, subset: &[usize]) -> Result<usize, CodecError> {
        if subset.is_empty() {
            return Err(CodecError::Empty);
        }
        let mut key: Vec<usize> = subset.to_vec();
        key.sort_unstable();
        key.dedup();
        if key.len() > self.max_subset {
            return Err(CodecError::TooLarge {
                got: key.len(),
                max: self.max_subset,
            });
        }
        if let Some(&id) = key.iter().find(|&&e| e >= self.num_elevators) {
            return Err(CodecError::OutOfRange(id));
        }
        Ok(self.index_of[&key])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_sizes_match_binomials() {
        assert_eq!(ActionCodec::new(6, 1).num_actions(), 6);
        assert_eq!(ActionCodec::new(6, 2).num_actions(), 21);
        assert_eq!(ActionCodec::new(6, 3).num_actions(), 41);
    }

    #[test]
    fn canonical_enumeration_order() {
        let codec = ActionCodec::new(6, 3);
        assert_eq!(codec.decode(0).unwrap(), &[0]);
        assert_eq!(codec.decode(5).unwrap(), &[5]);
        assert_eq!(codec.decode(6).unwrap(), &[0, 1]);
        assert_eq!(codec.decode(7).unwrap(), &[0, 2]);
        assert_eq!(codec.decode(20).unwrap(), &[4, 5]);
        assert_eq!(codec.decode(21).unwrap(), &[0, 1, 2]);
        assert_eq!(codec.decode(40).unwrap(), &[3, 4, 5]);
    }

    #[test]
    fn exhaustive_bijection() {
        for max in 1..=3 {
            let codec = ActionCodec::new(6, max);
            for idx in 0..codec.num_actions() {
                let subset = codec.decode(idx).unwrap().to_vec();
                assert!(!subset.is_empty() && subset.len() <= max);
                assert!(subset.windows(2).all(|w| w[0] < w[1]));
                assert_eq!(codec.encode(&subset).unwrap(), idx);
            }
        }
    }

    #[test]
    fn encode_rejects_bad_subsets() {
        let codec = ActionCodec::new(6, 2);
        assert_eq!(codec.encode(&[]), Err(CodecError::Empty));
        assert_eq!(
            codec.encode(&[0, 1, 2]),
            Err(CodecError::TooLarge { got: 3, max: 2 })
        );
        assert_eq!(codec.encode(&[6]), Err(CodecError::OutOfRange(6)));
        assert!(codec.decode(21).is_err());
        // unordered and duplicated inputs canonicalize
        assert_eq!(codec.encode(&[3, 1]).unwrap(), codec.encode(&[1, 3]).unwrap());
        assert_eq!(codec.encode(&[2, 2]).unwrap(), codec.encode(&[2]).unwrap());
    }
}
