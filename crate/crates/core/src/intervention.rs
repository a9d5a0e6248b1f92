//! Circular-intervention rules: grade + usage path -> feasible actions.

use std::fmt;

use serde::Serialize;

use crate::domain::Grade;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum InterventionClass {
    Reusable = 1,
    MinorRepairRefurbishment = 2,
    GeneralMaintenance = 3,
    MajorRepairRefurbishment = 4,
    Recyclable = 5,
}

impl InterventionClass {
    pub const ALL: [InterventionClass; 5] = [
        InterventionClass::Reusable,
        InterventionClass::MinorRepairRefurbishment,
        InterventionClass::GeneralMaintenance,
        InterventionClass::MajorRepairRefurbishment,
        InterventionClass::Recyclable,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            InterventionClass::Reusable => "Reusable",
            InterventionClass::MinorRepairRefurbishment => "MinorRepairRefurbishment",
            InterventionClass::GeneralMaintenance => "GeneralMaintenance",
            InterventionClass::MajorRepairRefurbishment => "MajorRepairRefurbishment",
            InterventionClass::Recyclable => "Recyclable",
        }
    }
}

impl fmt::Display for InterventionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Class {} ({})", self.number(), self.name())
    }
}

/// Usage-level step of one or two scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "u8")]
pub struct Offset(u8);

impl Offset {
    pub fn new(n: i64) -> Result<Self> {
        match n {
            1 | 2 => Ok(Offset(n as u8)),
            _ => Err(Error::InvalidOffset(n)),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl From<Offset> for u8 {
    fn from(o: Offset) -> u8 {
        o.0
    }
}

/// Where the component goes next. Upcycle moves to a more demanding usage
/// (`i - offset`), downcycle to a less demanding one (`i + offset`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "offset", rename_all = "lowercase")]
pub enum UsagePath {
    Reuse,
    Upcycle(Offset),
    Downcycle(Offset),
}

impl UsagePath {
    /// Builds a path from its name and offset. Reuse takes no offset (or 0);
    /// upcycle and downcycle require 1 or 2.
    pub fn parse(kind: &str, offset: Option<i64>) -> Result<Self> {
        match kind.trim().to_ascii_lowercase().as_str() {
            "reuse" => match offset {
                None | Some(0) => Ok(UsagePath::Reuse),
                Some(n) => Err(Error::InvalidOffset(n)),
            },
            "upcycle" => Ok(UsagePath::Upcycle(Offset::new(offset.unwrap_or(1))?)),
            "downcycle" => Ok(UsagePath::Downcycle(Offset::new(offset.unwrap_or(1))?)),
            other => Err(Error::Parse(format!(
                "unknown usage path {other:?} (expected reuse, upcycle or downcycle)"
            ))),
        }
    }

    pub fn offset(self) -> u8 {
        match self {
            UsagePath::Reuse => 0,
            UsagePath::Upcycle(o) | UsagePath::Downcycle(o) => o.get(),
        }
    }

    /// The five well-formed paths.
    pub fn all() -> [UsagePath; 5] {
        [
            UsagePath::Reuse,
            UsagePath::Upcycle(Offset(1)),
            UsagePath::Upcycle(Offset(2)),
            UsagePath::Downcycle(Offset(1)),
            UsagePath::Downcycle(Offset(2)),
        ]
    }
}

impl fmt::Display for UsagePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UsagePath::Reuse => write!(f, "reuse"),
            UsagePath::Upcycle(o) => write!(f, "upcycle (usage i-{})", o.get()),
            UsagePath::Downcycle(o) => write!(f, "downcycle (usage i+{})", o.get()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InterventionDecision {
    pub path: UsagePath,
    pub input_grade: Grade,
    pub class: InterventionClass,
    /// `None` for material-level recycling.
    pub resulting_grade: Option<Grade>,
    /// Signed usage-level move: negative is upward, positive downward.
    pub target_offset: i8,
    pub action: String,
}

fn decision(
    path: UsagePath,
    input_grade: Grade,
    class: InterventionClass,
    resulting_grade: Grade,
    target_offset: i8,
    action: &str,
) -> InterventionDecision {
    InterventionDecision {
        path,
        input_grade,
        class,
        resulting_grade: Some(resulting_grade),
        target_offset,
        action: action.to_string(),
    }
}

fn recycle(path: UsagePath, input_grade: Grade) -> InterventionDecision {
    InterventionDecision {
        path,
        input_grade,
        class: InterventionClass::Recyclable,
        resulting_grade: None,
        target_offset: 0,
        action: "demolish and recycle at material level".to_string(),
    }
}

pub fn reuse_decisions(grade: Grade) -> Vec<InterventionDecision> {
    use InterventionClass::*;
    let p = UsagePath::Reuse;
    let d = match grade {
        Grade::A => decision(p, grade, Reusable, Grade::A, 0, "label and package"),
        Grade::B => decision(p, grade, MinorRepairRefurbishment, Grade::A, 0, "minor repair and refurbishment"),
        Grade::C => decision(p, grade, GeneralMaintenance, Grade::A, 0, "general maintenance"),
        Grade::D => decision(p, grade, MajorRepairRefurbishment, Grade::A, 0, "major repair and refurbishment"),
        Grade::E => recycle(p, grade),
    };
    vec![d]
}

pub fn upcycle_decisions(grade: Grade, offset: i64) -> Result<Vec<InterventionDecision>> {
    use InterventionClass::*;
    let off = Offset::new(offset)?;
    let p = UsagePath::Upcycle(off);
    let up = -(off.get() as i8);
    let d = match grade {
        Grade::A => decision(p, grade, Reusable, Grade::A, up, "cutting for repurpose"),
        Grade::B => decision(p, grade, MinorRepairRefurbishment, Grade::B, up, "minor repair and refurbishment"),
        Grade::C => decision(p, grade, GeneralMaintenance, Grade::C, up, "general maintenance"),
        // Grade D cannot move up; it is restored in the current usage.
        Grade::D => decision(p, grade, MajorRepairRefurbishment, Grade::A, 0, "major repair and refurbishment in same usage"),
        Grade::E => recycle(p, grade),
    };
    Ok(vec![d])
}

pub fn downcycle_decisions(grade: Grade, offset: i64) -> Result<Vec<InterventionDecision>> {
    use InterventionClass::*;
    let off = Offset::new(offset)?;
    let p = UsagePath::Downcycle(off);
    let down = off.get() as i8;
    let both = |class, action: &str, results: [Grade; 2]| {
        results.map(|r| decision(p, grade, class, r, down, action)).to_vec()
    };
    let out = match grade {
        Grade::A => vec![decision(p, grade, MinorRepairRefurbishment, Grade::A, down, "minor repurpose (re-paint)")],
        Grade::B => both(MinorRepairRefurbishment, "minor repair and refurbishment", [Grade::A, Grade::B]),
        Grade::C => both(GeneralMaintenance, "general maintenance", [Grade::A, Grade::B]),
        Grade::D => both(MajorRepairRefurbishment, "major repair and refurbishment", [Grade::A, Grade::B]),
        Grade::E => {
            let mut v = both(MajorRepairRefurbishment, "major repair and refurbishment", [Grade::B, Grade::C]);
            v.push(recycle(p, grade));
            v
        }
    };
    Ok(out)
}

/// Dispatches to the reuse, upcycle or downcycle table.
pub fn decide(grade: Grade, path: UsagePath) -> Vec<InterventionDecision> {
    match path {
        UsagePath::Reuse => reuse_decisions(grade),
        UsagePath::Upcycle(o) => upcycle_decisions(grade, o.get().into()).expect("offset is valid"),
        UsagePath::Downcycle(o) => downcycle_decisions(grade, o.get().into()).expect("offset is valid"),
    }
}
