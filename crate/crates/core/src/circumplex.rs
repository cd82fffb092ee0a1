//! The eight-attribute soundscape circumplex and its angular relations.
//!
//! Attributes sit at 45° steps. Pleasant is at 0° and angles increase
//! counterclockwise through Vibrant, Eventful, Chaotic, Annoying, Monotonous,
//! Uneventful and Calm. Every relation (adjacent, orthogonal, antipodal) is
//! derived from the angle table rather than hard-coded.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircumplexError {
    #[error("{0} lies on a derived axis; orthogonal relations are defined for main-axis attributes only")]
    DerivedAxisAttribute(Attribute),
    #[error("unknown attribute name `{0}`")]
    UnknownAttribute(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Pleasant,
    Vibrant,
    Eventful,
    Chaotic,
    Annoying,
    Monotonous,
    Uneventful,
    Calm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AxisKind {
    Main,
    Derived,
}

/// Rotation sense on the circumplex. Clockwise decreases the angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Clockwise,
    Counterclockwise,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Clockwise => Direction::Counterclockwise,
            Direction::Counterclockwise => Direction::Clockwise,
        }
    }

    fn signed(self, degrees: i32) -> i32 {
        match self {
            Direction::Clockwise => -degrees,
            Direction::Counterclockwise => degrees,
        }
    }
}

const STEP_DEGREES: u16 = 45;

impl Attribute {
    /// All attributes in increasing angle order.
    pub const ALL: [Attribute; 8] = [
        Attribute::Pleasant,
        Attribute::Vibrant,
        Attribute::Eventful,
        Attribute::Chaotic,
        Attribute::Annoying,
        Attribute::Monotonous,
        Attribute::Uneventful,
        Attribute::Calm,
    ];

    /// Angular position in degrees, in `[0, 360)`.
    pub fn angle(self) -> u16 {
        self.octant() * STEP_DEGREES
    }

    fn octant(self) -> u16 {
        Self::ALL
            .iter()
            .position(|&a| a == self)
            .expect("attribute in table") as u16
    }

    /// Looks up the attribute at `degrees` (taken modulo 360). Returns `None`
    /// when the angle is not a multiple of 45°.
    pub fn at_angle(degrees: i32) -> Option<Attribute> {
        let norm = degrees.rem_euclid(360);
        if norm % STEP_DEGREES as i32 != 0 {
            return None;
        }
        Some(Self::ALL[(norm / STEP_DEGREES as i32) as usize])
    }

    fn rotated(self, degrees: i32) -> Attribute {
        Self::at_angle(self.angle() as i32 + degrees).expect("rotation by a multiple of 45°")
    }

    pub fn axis_kind(self) -> AxisKind {
        if self.angle().is_multiple_of(90) {
            AxisKind::Main
        } else {
            AxisKind::Derived
        }
    }

    pub fn is_main_axis(self) -> bool {
        self.axis_kind() == AxisKind::Main
    }

    /// The attribute 45° away in the given direction.
    pub fn adjacent(self, direction: Direction) -> Attribute {
        self.rotated(direction.signed(45))
    }

    /// The attribute 180° away.
    pub fn antipodal(self) -> Attribute {
        self.rotated(180)
    }

    /// The attribute 90° away in the given direction. Only defined for
    /// main-axis attributes.
    pub fn orthogonal(self, direction: Direction) -> Result<Attribute, CircumplexError> {
        match self.axis_kind() {
            AxisKind::Main => Ok(self.rotated(direction.signed(90))),
            AxisKind::Derived => Err(CircumplexError::DerivedAxisAttribute(self)),
        }
    }

    /// Lowercase English name, as used in prompts and every file format.
    pub fn name(self) -> &'static str {
        match self {
            Attribute::Pleasant => "pleasant",
            Attribute::Vibrant => "vibrant",
            Attribute::Eventful => "eventful",
            Attribute::Chaotic => "chaotic",
            Attribute::Annoying => "annoying",
            Attribute::Monotonous => "monotonous",
            Attribute::Uneventful => "uneventful",
            Attribute::Calm => "calm",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = CircumplexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|a| a.name() == wanted)
            .ok_or_else(|| CircumplexError::UnknownAttribute(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Attribute::*;
    use Direction::*;

    #[test]
    fn angle_table() {
        let angles: Vec<u16> = Attribute::ALL.iter().map(|a| a.angle()).collect();
        assert_eq!(angles, vec![0, 45, 90, 135, 180, 225, 270, 315]);
        let main: Vec<_> = Attribute::ALL
            .into_iter()
            .filter(|a| a.is_main_axis())
            .collect();
        assert_eq!(main, vec![Pleasant, Eventful, Annoying, Uneventful]);
        assert_eq!(Calm.axis_kind(), AxisKind::Derived);
    }

    #[test]
    fn adjacency_examples() {
        assert_eq!(Monotonous.adjacent(Counterclockwise), Uneventful);
        assert_eq!(Monotonous.adjacent(Clockwise), Annoying);
        assert_eq!(Chaotic.adjacent(Clockwise), Eventful);
        assert_eq!(Chaotic.adjacent(Counterclockwise), Annoying);
        assert_eq!(Pleasant.adjacent(Clockwise), Calm);
    }

    #[test]
    fn antipodal_pairs() {
        assert_eq!(Eventful.antipodal(), Uneventful);
        assert_eq!(Pleasant.antipodal(), Annoying);
        assert_eq!(Vibrant.antipodal(), Monotonous);
        assert_eq!(Calm.antipodal(), Chaotic);
    }

    #[test]
    fn orthogonal_examples() {
        assert_eq!(Annoying.orthogonal(Counterclockwise), Ok(Uneventful));
        assert_eq!(Annoying.orthogonal(Clockwise), Ok(Eventful));
        assert_eq!(Pleasant.orthogonal(Clockwise), Ok(Uneventful));
        assert_eq!(
            Vibrant.orthogonal(Clockwise),
            Err(CircumplexError::DerivedAxisAttribute(Vibrant))
        );
    }

    #[test]
    fn relations_from_angles() {
        for a in Attribute::ALL {
            for d in [Clockwise, Counterclockwise] {
                let step = (a.adjacent(d).angle() as i32 - a.angle() as i32).rem_euclid(360);
                assert!(step == 45 || step == 315);
                assert_eq!(a.adjacent(d).adjacent(d.reversed()), a);
                if a.is_main_axis() {
                    let o = a.orthogonal(d).unwrap();
                    assert!(o.is_main_axis());
                    assert_eq!(o, a.adjacent(d).adjacent(d));
                }
            }
            assert_eq!(a.antipodal().antipodal(), a);
        }
        let mut images: Vec<_> = Attribute::ALL
            .iter()
            .map(|a| a.adjacent(Clockwise))
            .collect();
        images.sort();
        let mut all = Attribute::ALL.to_vec();
        all.sort();
        assert_eq!(images, all);
    }

    #[test]
    fn names_round_trip() {
        for a in Attribute::ALL {
            assert_eq!(a.name().parse::<Attribute>().unwrap(), a);
            assert_eq!(
                serde_json::to_string(&a).unwrap(),
                format!("\"{}\"", a.name())
            );
        }
        assert_eq!(" Calm ".parse::<Attribute>().unwrap(), Calm);
        assert!("serene".parse::<Attribute>().is_err());
        assert_eq!(Attribute::at_angle(-45), Some(Calm));
        assert_eq!(Attribute::at_angle(30), None);
    }
}
