//! Donation strategies and their elementary cellular automaton encodings.
//!
//! A strategy is described semantically by a [`StrategyDescriptor`]: which
//! neighbors a donor considers eligible ([`Family`]), which sides it looks at
//! ([`Directionality`]) and whether it freezes when two neighbors qualify
//! (hesitation). The Wolfram rule number of a strategy is never written down
//! by hand; it is derived by evaluating [`decide_donation`] over all eight
//! neighborhoods.

use core::fmt;
use core::str::FromStr;

use crate::error::Error;

/// Binary reputation of a cell. `High` renders black, `Low` renders white.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(u8)]
pub enum Reputation {
    #[default]
    Low = 0,
    High = 1,
}

impl Reputation {
    #[inline]
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Reputation::High
        } else {
            Reputation::Low
        }
    }

    #[inline]
    pub fn is_high(self) -> bool {
        self == Reputation::High
    }

    #[inline]
    pub fn flipped(self) -> Self {
        match self {
            Reputation::Low => Reputation::High,
            Reputation::High => Reputation::Low,
        }
    }
}

/// Which neighbors a donor is willing to support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// In-group bias: donate only to neighbors sharing the donor's reputation.
    InGroupBias,
    /// Feudal system: only low donors give, and only to high recipients.
    FeudalSystem,
    /// Rank-based assistance: donate to neighbors of equal or higher rank.
    RankBasedAssistance,
    /// Always donate to both neighbors.
    Altruist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Directionality {
    Both,
    LeftOnly,
    RightOnly,
}

impl Directionality {
    pub fn mirrored(self) -> Self {
        match self {
            Directionality::Both => Directionality::Both,
            Directionality::LeftOnly => Directionality::RightOnly,
            Directionality::RightOnly => Directionality::LeftOnly,
        }
    }
}

/// Semantic identity of a donation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StrategyDescriptor {
    pub family: Family,
    pub directionality: Directionality,
    pub hesitation: bool,
}

impl StrategyDescriptor {
    pub const fn new(family: Family, directionality: Directionality, hesitation: bool) -> Self {
        StrategyDescriptor {
            family,
            directionality,
            hesitation,
        }
    }

    /// The unconditional donor (rule 255).
    pub const ALTRUIST: StrategyDescriptor =
        StrategyDescriptor::new(Family::Altruist, Directionality::Both, false);

    pub fn rule_table(&self) -> RuleTable {
        derive_rule_table(*self)
    }

    pub fn rule_number(&self) -> u8 {
        self.rule_table().number()
    }

    /// Same strategy looking at the opposite side.
    pub fn mirrored(&self) -> Self {
        StrategyDescriptor {
            directionality: self.directionality.mirrored(),
            ..*self
        }
    }
}

impl fmt::Display for StrategyDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match self.family {
            Family::InGroupBias => "IGB",
            Family::FeudalSystem => "FS",
            Family::RankBasedAssistance => "RBA",
            Family::Altruist => return f.write_str("ALT"),
        };
        let direction = match self.directionality {
            Directionality::Both => "both",
            Directionality::LeftOnly => "left",
            Directionality::RightOnly => "right",
        };
        write!(f, "{family}:{direction}")?;
        if self.hesitation {
            f.write_str(":h")?;
        }
        Ok(())
    }
}

/// Parses `FAMILY:DIRECTION[:h]`, e.g. `IGB:both`, `FS:left`, `RBA:both:h`.
/// `ALT` (or `ALT:both`) names the altruist.
impl FromStr for StrategyDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidRuleSpec;
        let mut parts = s.split(':');
        let family = match parts.next().map(str::trim) {
            Some(p) if p.eq_ignore_ascii_case("igb") => Family::InGroupBias,
            Some(p) if p.eq_ignore_ascii_case("fs") => Family::FeudalSystem,
            Some(p) if p.eq_ignore_ascii_case("rba") => Family::RankBasedAssistance,
            Some(p) if p.eq_ignore_ascii_case("alt") => Family::Altruist,
            _ => return Err(bad()),
        };
        let directionality = match parts.next().map(str::trim) {
            None if family == Family::Altruist => Directionality::Both,
            Some(p) if p.eq_ignore_ascii_case("both") => Directionality::Both,
            Some(p) if p.eq_ignore_ascii_case("left") => Directionality::LeftOnly,
            Some(p) if p.eq_ignore_ascii_case("right") => Directionality::RightOnly,
            _ => return Err(bad()),
        };
        let hesitation = match parts.next().map(str::trim) {
            None => false,
            Some(p) if p.eq_ignore_ascii_case("h") => true,
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        if family == Family::Altruist {
            return Ok(StrategyDescriptor::ALTRUIST);
        }
        Ok(StrategyDescriptor::new(family, directionality, hesitation))
    }
}

/// A `(left, center, right)` neighborhood, indexed `4·L + 2·C + R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Neighborhood {
    pub left: Reputation,
    pub center: Reputation,
    pub right: Reputation,
}

impl Neighborhood {
    pub const fn new(left: Reputation, center: Reputation, right: Reputation) -> Self {
        Neighborhood {
            left,
            center,
            right,
        }
    }

    #[inline]
    pub fn index(&self) -> usize {
        ((self.left as usize) << 2) | ((self.center as usize) << 1) | self.right as usize
    }

    /// Inverse of [`Neighborhood::index`]; only the low three bits are read.
    #[inline]
    pub fn from_index(index: usize) -> Self {
        Neighborhood {
            left: Reputation::from_bit(index & 0b100 != 0),
            center: Reputation::from_bit(index & 0b010 != 0),
            right: Reputation::from_bit(index & 0b001 != 0),
        }
    }

    pub fn all() -> impl Iterator<Item = Neighborhood> {
        (0..8).map(Neighborhood::from_index)
    }

    pub fn reflected(&self) -> Self {
        Neighborhood::new(self.right, self.center, self.left)
    }
}

/// Eight-entry neighborhood to next-state lookup of an elementary CA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RuleTable {
    bits: [bool; 8],
}

impl RuleTable {
    pub const fn from_bits(bits: [bool; 8]) -> Self {
        RuleTable { bits }
    }

    pub fn bits(&self) -> [bool; 8] {
        self.bits
    }

    /// Wolfram code: `Σ bits[k]·2^k`.
    pub fn number(&self) -> u8 {
        self.bits
            .iter()
            .enumerate()
            .fold(0u8, |acc, (k, &b)| acc | ((b as u8) << k))
    }

    #[inline]
    pub fn output(&self, neighborhood: Neighborhood) -> Reputation {
        Reputation::from_bit(self.bits[neighborhood.index()])
    }

    #[inline]
    pub fn output_at(&self, index: usize) -> bool {
        self.bits[index]
    }
}

impl From<u8> for RuleTable {
    fn from(n: u8) -> Self {
        let mut bits = [false; 8];
        for (k, bit) in bits.iter_mut().enumerate() {
            *bit = (n >> k) & 1 == 1;
        }
        RuleTable { bits }
    }
}

/// Builds the table of a raw Wolfram rule number.
pub fn rule_table_from_number(n: u32) -> Result<RuleTable, Error> {
    u8::try_from(n)
        .map(RuleTable::from)
        .map_err(|_| Error::RuleNumberOutOfRange(n))
}

/// How a single donation of total value 1 is split between the neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DonationDecision {
    pub share_left: f64,
    pub share_right: f64,
}

impl DonationDecision {
    pub const NONE: DonationDecision = DonationDecision {
        share_left: 0.0,
        share_right: 0.0,
    };
    pub const LEFT: DonationDecision = DonationDecision {
        share_left: 1.0,
        share_right: 0.0,
    };
    pub const RIGHT: DonationDecision = DonationDecision {
        share_left: 0.0,
        share_right: 1.0,
    };
    pub const SPLIT: DonationDecision = DonationDecision {
        share_left: 0.5,
        share_right: 0.5,
    };

    #[inline]
    pub fn total(&self) -> f64 {
        self.share_left + self.share_right
    }

    #[inline]
    pub fn donates(&self) -> bool {
        self.total() > 0.0
    }
}

/// Whether a donor of `family` would support a neighbor with the given
/// reputation. The altruist is eligible towards everybody.
pub fn eligibility(family: Family, donor: Reputation, neighbor: Reputation) -> bool {
    match family {
        Family::InGroupBias => neighbor == donor,
        Family::FeudalSystem => donor == Reputation::Low && neighbor == Reputation::High,
        Family::RankBasedAssistance => neighbor >= donor,
        Family::Altruist => true,
    }
}

/// Donation split for a donor given the (possibly misperceived) neighbor states.
pub fn decide_donation(
    desc: StrategyDescriptor,
    perceived_left: Reputation,
    donor: Reputation,
    perceived_right: Reputation,
) -> DonationDecision {
    if desc.family == Family::Altruist {
        return DonationDecision::SPLIT;
    }
    let (look_left, look_right) = match desc.directionality {
        Directionality::Both => (true, true),
        Directionality::LeftOnly => (true, false),
        Directionality::RightOnly => (false, true),
    };
    let left = look_left && eligibility(desc.family, donor, perceived_left);
    let right = look_right && eligibility(desc.family, donor, perceived_right);
    match (left, right) {
        (true, true) if desc.hesitation => DonationDecision::NONE,
        (true, true) => DonationDecision::SPLIT,
        (true, false) => DonationDecision::LEFT,
        (false, true) => DonationDecision::RIGHT,
        (false, false) => DonationDecision::NONE,
    }
}

/// Next-state table of a strategy: a cell turns high iff it donates.
pub fn derive_rule_table(desc: StrategyDescriptor) -> RuleTable {
    let mut bits = [false; 8];
    for (k, bit) in bits.iter_mut().enumerate() {
        let nb = Neighborhood::from_index(k);
        *bit = decide_donation(desc, nb.left, nb.center, nb.right).donates();
    }
    RuleTable::from_bits(bits)
}

const fn d(family: Family, directionality: Directionality, hesitation: bool) -> StrategyDescriptor {
    StrategyDescriptor::new(family, directionality, hesitation)
}

/// The twelve socially interpretable rules in canonical order:
/// IGB 219/195/153, FS 50/48/34, RBA 251/243/187, hesitant 90/72/18.
///
/// Rule 90 doubles as hesitant RBA with a fixed preference; it is listed
/// once, under in-group bias.
pub const CURATED: [StrategyDescriptor; 12] = {
    use Directionality::*;
    use Family::*;
    [
        d(InGroupBias, Both, false),
        d(InGroupBias, LeftOnly, false),
        d(InGroupBias, RightOnly, false),
        d(FeudalSystem, Both, false),
        d(FeudalSystem, LeftOnly, false),
        d(FeudalSystem, RightOnly, false),
        d(RankBasedAssistance, Both, false),
        d(RankBasedAssistance, LeftOnly, false),
        d(RankBasedAssistance, RightOnly, false),
        d(InGroupBias, Both, true),
        d(RankBasedAssistance, Both, true),
        d(FeudalSystem, Both, true),
    ]
};

pub fn curated_strategies() -> [StrategyDescriptor; 12] {
    CURATED
}

/// Wolfram numbers of [`CURATED`], in the same order.
pub fn curated_rule_numbers() -> [u8; 12] {
    CURATED.map(|desc| desc.rule_number())
}

/// Finds the canonical descriptor of a rule number (curated rules and 255).
pub fn descriptor_for_rule(number: u8) -> Option<StrategyDescriptor> {
    CURATED
        .iter()
        .chain(core::iter::once(&StrategyDescriptor::ALTRUIST))
        .copied()
        .find(|desc| desc.rule_number() == number)
}
