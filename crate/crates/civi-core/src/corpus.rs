//! Embedded copies of the spec corpus under `specs/`, plus the expected
//! verdict table the corpus suite runs against.

use crate::parser::lower::{LinkError, Linked};

pub const TOY2PC: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../specs/toy2pc/toy2pc.civ"
));
pub const TOY2PC_CHAIN: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../specs/toy2pc/toy2pc.chain"
));
pub const TWOPHASE: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../specs/twophase/twophase.civ"
));
pub const TWOPHASE_CHAIN: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../specs/twophase/twophase.chain"
));
pub const MONGO_FLUENTS: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../specs/mongo/mongo_fluents.civ"
));

pub fn toy2pc() -> Result<Linked, LinkError> {
    Linked::from_sources(&[("specs/toy2pc/toy2pc.civ", TOY2PC)])
}

pub fn twophase() -> Result<Linked, LinkError> {
    Linked::from_sources(&[("specs/twophase/twophase.civ", TWOPHASE)])
}

pub fn mongo() -> Result<Linked, LinkError> {
    Linked::from_sources(&[("specs/mongo/mongo_fluents.civ", MONGO_FLUENTS)])
}

/// Parses a chain file: one contract name per line, `#` comments.
pub fn parse_chain(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.to_string())
        .collect()
}
