use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};

pub const PAD_LEAF: &str = "PAD";

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub fn of(bytes: &[u8]) -> Self {
        Self(Sha256::digest(bytes).into())
    }

    pub fn pair(left: &Digest, right: &Digest) -> Self {
        let mut h = Sha256::new();
        h.update(left.0);
        h.update(right.0);
        Self(h.finalize().into())
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s.trim()).map_err(|e| Error::Parse(format!("hash hex: {e}")))?;
        let arr: [u8; 32] = bytes.try_into().map_err(|_| Error::Parse("hash must be 32 bytes".into()))?;
        Ok(Self(arr))
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Digest::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Which side of the running hash the sibling sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionProof {
    pub leaf_index: usize,
    pub siblings: Vec<(Digest, Side)>,
}

impl InclusionProof {
    /// Root implied by walking the proof up from `leaf`.
    pub fn root_from(&self, leaf: &Digest) -> Digest {
        self.siblings.iter().fold(*leaf, |acc, (sib, side)| match side {
            Side::Left => Digest::pair(sib, &acc),
            Side::Right => Digest::pair(&acc, sib),
        })
    }

    /// Sides must agree with the bits of the leaf index.
    pub fn well_formed(&self) -> bool {
        self.siblings.len() < usize::BITS as usize
            && self.leaf_index >> self.siblings.len() == 0
            && self.siblings.iter().enumerate().all(|(lvl, (_, side))| {
                let is_right_child = (self.leaf_index >> lvl) & 1 == 1;
                (*side == Side::Left) == is_right_child
            })
    }

    pub fn verify(&self, root: &Digest, leaf: &Digest) -> bool {
        self.well_formed() && self.root_from(leaf) == *root
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleTree {
    pub leaves: Vec<Digest>,
    /// levels[0] is the padded leaf layer; the last level holds the root.
    pub levels: Vec<Vec<Digest>>,
    pub root: Digest,
}

impl MerkleTree {
    /// Pads to the next power of two (at least two) with H("PAD").
    pub fn build(leaves: Vec<Digest>) -> Result<Self> {
        if leaves.is_empty() {
            return Err(Error::Empty("merkle leaves"));
        }
        let width = leaves.len().next_power_of_two().max(2);
        let mut layer = leaves.clone();
        layer.resize(width, Digest::of(PAD_LEAF.as_bytes()));
        let mut levels = vec![layer];
        while levels.last().unwrap().len() > 1 {
            let next = levels.last().unwrap().chunks(2).map(|c| Digest::pair(&c[0], &c[1])).collect();
            levels.push(next);
        }
        let root = levels.last().unwrap()[0];
        Ok(Self { leaves, levels, root })
    }

    pub fn padded_len(&self) -> usize {
        self.levels[0].len()
    }

    pub fn prove(&self, index: usize) -> Result<InclusionProof> {
        if index >= self.leaves.len() {
            return Err(Error::Index { index, n: self.leaves.len() });
        }
        let mut siblings = Vec::with_capacity(self.levels.len() - 1);
        let mut i = index;
        for layer in &self.levels[..self.levels.len() - 1] {
            let side = if i.is_multiple_of(2) { Side::Right } else { Side::Left };
            siblings.push((layer[i ^ 1], side));
            i /= 2;
        }
        Ok(InclusionProof { leaf_index: index, siblings })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_leaf_pads_to_two() {
        let leaf = Digest::of(b"x");
        let t = MerkleTree::build(vec![leaf]).unwrap();
        assert_eq!(t.padded_len(), 2);
        let pad: [u8; 32] = Sha256::digest(b"PAD").into();
        let mut h = Sha256::new();
        h.update(leaf.0);
        h.update(pad);
        let expect: [u8; 32] = h.finalize().into();
        assert_eq!(t.root.0, expect);
        assert!(MerkleTree::build(vec![]).is_err());
    }

    #[test]
    fn hex_roundtrip() {
        let d = Digest::of(b"abc");
        assert_eq!(d.to_hex(), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(Digest::from_hex(&d.to_hex()).unwrap(), d);
        assert!(Digest::from_hex("abcd").is_err());
    }

    proptest! {
        #[test]
        fn every_leaf_proves(n in 1usize..40, flip in any::<(usize, usize, u8)>()) {
            let leaves: Vec<Digest> = (0..n).map(|i| Digest::of(format!("leaf{i}").as_bytes())).collect();
            let t = MerkleTree::build(leaves.clone()).unwrap();
            for (i, leaf) in leaves.iter().enumerate() {
                let p = t.prove(i).unwrap();
                prop_assert_eq!(1usize << p.siblings.len(), t.padded_len());
                prop_assert!(p.verify(&t.root, leaf));
                let mut bad = p.clone();
                let lvl = flip.0 % bad.siblings.len();
                bad.siblings[lvl].0 .0[flip.1 % 32] ^= 1 << (flip.2 % 8);
                prop_assert!(!bad.verify(&t.root, leaf));
            }
        }
    }
}
