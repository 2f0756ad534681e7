//! Class identifiers and the precedence hierarchy used to resolve overlaps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Number of classes, background included.
pub const NUM_CLASSES: usize = 7;

/// One of the seven label classes. The discriminant is the pixel value
/// stored in mask files; Background is always 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(u8)]
pub enum ClassId {
    #[default]
    Background = 0,
    Crosscut = 1,
    Rot = 2,
    RotMaybe = 3,
    PressureWood = 4,
    Discoloration = 5,
    IngrowthCrack = 6,
}

impl ClassId {
    pub const ALL: [ClassId; NUM_CLASSES] = [
        ClassId::Background,
        ClassId::Crosscut,
        ClassId::Rot,
        ClassId::RotMaybe,
        ClassId::PressureWood,
        ClassId::Discoloration,
        ClassId::IngrowthCrack,
    ];

    /// Crosscut and the five defect classes.
    pub const FOREGROUND: [ClassId; NUM_CLASSES - 1] = [
        ClassId::Crosscut,
        ClassId::Rot,
        ClassId::RotMaybe,
        ClassId::PressureWood,
        ClassId::Discoloration,
        ClassId::IngrowthCrack,
    ];

    pub fn from_u8(value: u8) -> Result<Self> {
        Self::ALL
            .get(value as usize)
            .copied()
            .ok_or(Error::InvalidClassId(value))
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassId::Background => "Background",
            ClassId::Crosscut => "Crosscut",
            ClassId::Rot => "Rot",
            ClassId::RotMaybe => "RotMaybe",
            ClassId::PressureWood => "PressureWood",
            ClassId::Discoloration => "Discoloration",
            ClassId::IngrowthCrack => "IngrowthCrack",
        }
    }

    /// Column label used in report tables.
    pub fn short_name(self) -> &'static str {
        match self {
            ClassId::Background => "BG",
            ClassId::Crosscut => "CC",
            ClassId::Rot => "R",
            ClassId::RotMaybe => "R(m)",
            ClassId::PressureWood => "PW",
            ClassId::Discoloration => "DC",
            ClassId::IngrowthCrack => "IC",
        }
    }

    /// Defect classes are every class except Background and Crosscut.
    pub fn is_defect(self) -> bool {
        !matches!(self, ClassId::Background | ClassId::Crosscut)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassId {
    type Err = Error;

    /// Accepts canonical names, short names and the spellings common in
    /// annotation tools ("Rot (maybe)", "Ingrowth/Crack", "pressure wood").
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        let class = match key.as_str() {
            "background" | "bg" => ClassId::Background,
            "crosscut" | "cc" => ClassId::Crosscut,
            "rot" | "r" => ClassId::Rot,
            "rotmaybe" | "rm" => ClassId::RotMaybe,
            "pressurewood" | "pw" => ClassId::PressureWood,
            "discoloration" | "discolouration" | "dc" => ClassId::Discoloration,
            "ingrowthcrack" | "ingrowth" | "crack" | "ic" => ClassId::IngrowthCrack,
            _ => return Err(Error::UnknownClass(s.to_string())),
        };
        Ok(class)
    }
}

impl Serialize for ClassId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ClassId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// Precedence order over the six non-background classes, highest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassHierarchy {
    precedence: Vec<ClassId>,
    // rank[class] = position in `precedence`; Background ranks below everything.
    rank: [u8; NUM_CLASSES],
}

impl ClassHierarchy {
    pub fn new(precedence: Vec<ClassId>) -> Result<Self> {
        if precedence.contains(&ClassId::Background) {
            return Err(Error::InvalidHierarchy(
                "Background cannot appear in the hierarchy".into(),
            ));
        }
        let mut rank = [u8::MAX; NUM_CLASSES];
        for (pos, class) in precedence.iter().enumerate() {
            if rank[class.index()] != u8::MAX {
                return Err(Error::InvalidHierarchy(format!("{class} listed twice")));
            }
            rank[class.index()] = pos as u8;
        }
        if let Some(missing) = ClassId::FOREGROUND
            .iter()
            .find(|c| rank[c.index()] == u8::MAX)
        {
            return Err(Error::InvalidHierarchy(format!("{missing} missing")));
        }
        Ok(Self { precedence, rank })
    }

    pub fn precedence(&self) -> &[ClassId] {
        &self.precedence
    }

    /// Position in the precedence list; 0 is the highest priority.
    /// Background gets the lowest rank.
    #[inline]
    pub fn rank(&self, class: ClassId) -> u8 {
        self.rank[class.index()]
    }

    /// True when `a` takes priority over `b`.
    #[inline]
    pub fn outranks(&self, a: ClassId, b: ClassId) -> bool {
        self.rank(a) < self.rank(b)
    }

    /// Non-background classes from lowest to highest precedence.
    pub fn ascending(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.precedence.iter().rev().copied()
    }
}

impl Default for ClassHierarchy {
    fn default() -> Self {
        Self::new(vec![
            ClassId::Rot,
            ClassId::Discoloration,
            ClassId::RotMaybe,
            ClassId::IngrowthCrack,
            ClassId::PressureWood,
            ClassId::Crosscut,
        ])
        .expect("default hierarchy is valid")
    }
}

impl Serialize for ClassHierarchy {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.precedence.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ClassHierarchy {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let precedence = Vec::<ClassId>::deserialize(deserializer)?;
        ClassHierarchy::new(precedence).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for class in ClassId::ALL {
            assert_eq!(ClassId::from_u8(class as u8).unwrap(), class);
            assert_eq!(class.name().parse::<ClassId>().unwrap(), class);
            assert_eq!(class.short_name().parse::<ClassId>().unwrap(), class);
        }
        assert!(ClassId::from_u8(7).is_err());
        assert_eq!(ClassId::Background as u8, 0);
    }

    #[test]
    fn parses_tool_spellings() {
        assert_eq!("Rot (maybe)".parse::<ClassId>().unwrap(), ClassId::RotMaybe);
        assert_eq!("Rot(maybe)".parse::<ClassId>().unwrap(), ClassId::RotMaybe);
        assert_eq!(
            "Ingrowth/Crack".parse::<ClassId>().unwrap(),
            ClassId::IngrowthCrack
        );
        assert_eq!(
            "Pressure Wood".parse::<ClassId>().unwrap(),
            ClassId::PressureWood
        );
        assert!("Knot".parse::<ClassId>().is_err());
    }

    #[test]
    fn default_hierarchy_order() {
        let h = ClassHierarchy::default();
        assert_eq!(
            h.precedence(),
            &[
                ClassId::Rot,
                ClassId::Discoloration,
                ClassId::RotMaybe,
                ClassId::IngrowthCrack,
                ClassId::PressureWood,
                ClassId::Crosscut
            ]
        );
        assert!(h.outranks(ClassId::Rot, ClassId::Crosscut));
        assert!(h.outranks(ClassId::Discoloration, ClassId::PressureWood));
        assert!(h.outranks(ClassId::Crosscut, ClassId::Background));
    }

    #[test]
    fn rejects_bad_hierarchies() {
        let mut p = ClassHierarchy::default().precedence().to_vec();
        p.pop();
        assert!(ClassHierarchy::new(p.clone()).is_err());
        p.push(ClassId::Rot);
        assert!(ClassHierarchy::new(p.clone()).is_err());
        p.pop();
        p.push(ClassId::Background);
        assert!(ClassHierarchy::new(p).is_err());
    }
}
