//! Closed vocabularies for BI-RADS ultrasound descriptors and reader calls.
//!
//! Level order follows the reporting table layout and fixes the ordinal codes
//! (first level = 1).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metrics::Candidacy;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {field} level {token:?}")]
pub struct UnknownLevel {
    pub field: &'static str,
    pub token: String,
}

/// A closed set of tokens with a fixed order.
pub trait Lexicon: Sized + Copy + Eq + 'static {
    const FIELD: &'static str;
    const ALL: &'static [Self];
    fn token(self) -> &'static str;

    fn parse(token: &str) -> Result<Self, UnknownLevel> {
        let t = token.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|v| v.token() == t)
            .ok_or_else(|| UnknownLevel { field: Self::FIELD, token: token.to_string() })
    }

    /// 1-based position in [`Lexicon::ALL`].
    fn code(self) -> usize {
        Self::ALL.iter().position(|&v| v == self).expect("member of ALL") + 1
    }

    fn from_code(code: usize) -> Option<Self> {
        code.checked_sub(1).and_then(|i| Self::ALL.get(i)).copied()
    }

    fn tokens() -> Vec<&'static str> {
        Self::ALL.iter().map(|v| v.token()).collect()
    }
}

macro_rules! lexicon {
    ($(#[$meta:meta])* $name:ident, $field:literal { $($variant:ident => $tok:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl Lexicon for $name {
            const FIELD: &'static str = $field;
            const ALL: &'static [Self] = &[$($name::$variant),+];
            fn token(self) -> &'static str {
                match self {
                    $($name::$variant => $tok),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.token())
            }
        }

        impl FromStr for $name {
            type Err = UnknownLevel;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                <Self as Lexicon>::parse(s)
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.token())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                <Self as Lexicon>::parse(&s).map_err(serde::de::Error::custom)
            }
        }
    };
}

lexicon!(
    /// Study partition a lesion belongs to.
    Cohort, "cohort" {
        Train => "train",
        Internal => "internal",
        External1 => "external1",
        External2 => "external2",
    }
);

lexicon!(TissueComposition, "tissue_composition" {
    Fat => "fat",
    Fibroglandular => "fibroglandular",
    Heterogeneous => "heterogeneous",
});

lexicon!(Shape, "shape" {
    Irregular => "irregular",
    Oval => "oval",
    Round => "round",
});

lexicon!(Orientation, "orientation" {
    Parallel => "parallel",
    NotParallel => "not_parallel",
});

lexicon!(Margin, "margin" {
    Circumscribed => "circumscribed",
    Angular => "angular",
    Indistinct => "indistinct",
    Microlobulated => "microlobulated",
    Spiculated => "spiculated",
});

lexicon!(EchoPattern, "echo_pattern" {
    Anechoic => "anechoic",
    ComplexCysticSolid => "complex_cystic_solid",
    Heterogeneous => "heterogeneous",
    Hyperechoic => "hyperechoic",
    Hypoechoic => "hypoechoic",
    Isoechoic => "isoechoic",
});

lexicon!(Posterior, "posterior" {
    Enhancement => "enhancement",
    None => "none",
    Shadowing => "shadowing",
});

lexicon!(Calcifications, "calcifications" {
    InMass => "in_mass",
    OutsideMass => "outside_mass",
    None => "none",
});

lexicon!(YesNo, "yes_no" {
    No => "no",
    Yes => "yes",
});

lexicon!(BiradsCategory, "birads_category" {
    C2 => "2",
    C3 => "3",
    C4A => "4A",
    C4B => "4B",
    C4C => "4C",
    C5 => "5",
});

lexicon!(Pathology, "pathology" {
    Benign => "benign",
    Malignant => "malignant",
    None => "none",
});

lexicon!(
    /// A reader's benign/malignant call; `n/a` when the reader did not call it.
    MalignancyCall, "malignancy_vote" {
        Benign => "benign",
        Malignant => "malignant",
        NotApplicable => "n/a",
    }
);

impl Lexicon for Candidacy {
    const FIELD: &'static str = "biopsy_vote";
    const ALL: &'static [Self] = &[Candidacy::NotCandid, Candidacy::Candid];
    fn token(self) -> &'static str {
        match self {
            Candidacy::Candid => "candid",
            Candidacy::NotCandid => "not_candid",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_codes_follow_listing_order() {
        assert_eq!(Margin::Circumscribed.code(), 1);
        assert_eq!(Margin::Spiculated.code(), 5);
        assert_eq!(Margin::from_code(3), Some(Margin::Indistinct));
        assert_eq!(Margin::from_code(0), None);
    }

    #[test]
    fn parsing_is_closed() {
        assert_eq!("spiculated".parse::<Margin>(), Ok(Margin::Spiculated));
        let e = "speculated".parse::<Margin>().unwrap_err();
        assert_eq!(e.field, "margin");
        assert_eq!(BiradsCategory::parse("4A"), Ok(BiradsCategory::C4A));
        assert_eq!(MalignancyCall::parse("n/a"), Ok(MalignancyCall::NotApplicable));
    }

    #[test]
    fn serde_uses_tokens() {
        let s = serde_json::to_string(&EchoPattern::ComplexCysticSolid).unwrap();
        assert_eq!(s, "\"complex_cystic_solid\"");
        assert!(serde_json::from_str::<Shape>("\"square\"").is_err());
    }
}
