//! Optical crossconnect state: a matching over communication-ion ports.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arch::ArchitectureSpec;
use crate::error::{Error, Result};

/// One communication ion, addressed as `ELU:position`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Port {
    pub elu: String,
    pub ion: usize,
}

impl Port {
    pub fn new(elu: impl Into<String>, ion: usize) -> Self {
        Self { elu: elu.into(), ion }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.elu, self.ion)
    }
}

impl FromStr for Port {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (elu, ion) = s
            .rsplit_once(':')
            .ok_or_else(|| Error::Switch(format!("port `{s}` is not of the form ELU:ion")))?;
        let ion = ion
            .parse()
            .map_err(|_| Error::Switch(format!("port `{s}` has a non-integer ion index")))?;
        if elu.is_empty() {
            return Err(Error::Switch(format!("port `{s}` has an empty ELU id")));
        }
        Ok(Port::new(elu, ion))
    }
}

impl Serialize for Port {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Port {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An optical path between two ports, stored with the smaller port first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(Port, Port)", into = "(Port, Port)")]
pub struct Link {
    a: Port,
    b: Port,
}

impl Link {
    pub fn new(a: Port, b: Port) -> Result<Self> {
        if a.elu == b.elu {
            return Err(Error::Switch(format!("link {a} - {b} stays inside one ELU")));
        }
        Ok(if a <= b { Self { a, b } } else { Self { a: b, b: a } })
    }

    pub fn a(&self) -> &Port {
        &self.a
    }

    pub fn b(&self) -> &Port {
        &self.b
    }

    pub fn ports(&self) -> [&Port; 2] {
        [&self.a, &self.b]
    }

    /// Unordered ELU pair, smaller id first.
    pub fn elus(&self) -> (&str, &str) {
        (&self.a.elu, &self.b.elu)
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

impl TryFrom<(Port, Port)> for Link {
    type Error = Error;

    fn try_from((a, b): (Port, Port)) -> Result<Self> {
        Link::new(a, b)
    }
}

impl From<Link> for (Port, Port) {
    fn from(l: Link) -> Self {
        (l.a, l.b)
    }
}

/// A non-blocking switch state: pairwise port-disjoint links.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Link>", into = "Vec<Link>")]
pub struct SwitchConfig {
    links: BTreeSet<Link>,
}

impl SwitchConfig {
    pub fn new(links: impl IntoIterator<Item = Link>) -> Result<Self> {
        let mut used = BTreeSet::new();
        let mut set = BTreeSet::new();
        for link in links {
            for p in link.ports() {
                if !used.insert(p.clone()) {
                    return Err(Error::Switch(format!("port {p} used by two links")));
                }
            }
            set.insert(link);
        }
        Ok(Self { links: set })
    }

    pub fn links(&self) -> &BTreeSet<Link> {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn contains(&self, link: &Link) -> bool {
        self.links.contains(link)
    }

    /// Checks every port against the architecture: known ELU, a communication
    /// ion, and the switch port budget.
    pub fn validate(&self, spec: &ArchitectureSpec) -> Result<()> {
        for link in &self.links {
            for p in link.ports() {
                let elu = spec.elu(&p.elu).ok_or_else(|| Error::UnknownElu(p.elu.clone()))?;
                if !elu.is_comm(p.ion) {
                    return Err(Error::Switch(format!(
                        "port {p} is not a communication ion of ELU {}",
                        elu.id
                    )));
                }
            }
        }
        if 2 * self.links.len() > spec.switch.ports {
            return Err(Error::Switch(format!(
                "{} links need {} ports, switch has {}",
                self.links.len(),
                2 * self.links.len(),
                spec.switch.ports
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<Link>> for SwitchConfig {
    type Error = Error;

    fn try_from(links: Vec<Link>) -> Result<Self> {
        SwitchConfig::new(links)
    }
}

impl From<SwitchConfig> for Vec<Link> {
    fn from(c: SwitchConfig) -> Self {
        c.links.into_iter().collect()
    }
}

/// Membership change between two switch states.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Reconfiguration {
    pub added: Vec<Link>,
    pub removed: Vec<Link>,
}

impl Reconfiguration {
    /// Links charged the reconfiguration time.
    pub fn suspended(&self) -> usize {
        self.added.len() + self.removed.len()
    }
}

/// Moves the switch to `new_links`, reporting which links changed membership.
pub fn reconfigure(
    cfg: &SwitchConfig,
    new_links: impl IntoIterator<Item = Link>,
) -> Result<(SwitchConfig, Reconfiguration)> {
    let next = SwitchConfig::new(new_links)?;
    let diff = Reconfiguration {
        added: next.links.difference(&cfg.links).cloned().collect(),
        removed: cfg.links.difference(&next.links).cloned().collect(),
    };
    Ok((next, diff))
}
