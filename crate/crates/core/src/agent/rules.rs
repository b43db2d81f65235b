use std::collections::BTreeSet;

use super::FindingCode;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("rule config: {0}")]
    Parse(String),
    #[error("unknown rule {0:?}")]
    UnknownRule(String),
    #[error("rule {0:?} cannot be disabled")]
    Mandatory(String),
    #[error("rule {rule:?}: expected true/false or \"on\"/\"off\", got {value}")]
    BadValue { rule: String, value: String },
}

/// Which structural checks the off-chain agent runs. Document resolution
/// is not a rule and always runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    disabled: BTreeSet<FindingCode>,
}

impl Default for RuleSet {
    fn default() -> Self {
        Self::all()
    }
}

impl RuleSet {
    pub fn all() -> Self {
        Self {
            disabled: BTreeSet::new(),
        }
    }

    pub fn is_enabled(&self, code: FindingCode) -> bool {
        !self.disabled.contains(&code)
    }

    pub fn set(&mut self, code: FindingCode, enabled: bool) -> Result<(), RuleError> {
        if code == FindingCode::UnresolvedDocument {
            if enabled {
                return Ok(());
            }
            return Err(RuleError::Mandatory(code.as_str().into()));
        }
        if enabled {
            self.disabled.remove(&code);
        } else {
            self.disabled.insert(code);
        }
        Ok(())
    }

    /// Applies `code = on|off|true|false` entries from a TOML table.
    pub fn from_toml_table(table: &toml::Table) -> Result<Self, RuleError> {
        let mut rules = Self::all();
        for (key, value) in table {
            let code = FindingCode::from_str(key).ok_or_else(|| RuleError::UnknownRule(key.clone()))?;
            let enabled = match value {
                toml::Value::Boolean(b) => *b,
                toml::Value::String(s) if s.eq_ignore_ascii_case("on") => true,
                toml::Value::String(s) if s.eq_ignore_ascii_case("off") => false,
                other => {
                    return Err(RuleError::BadValue {
                        rule: key.clone(),
                        value: other.to_string(),
                    })
                }
            };
            rules.set(code, enabled)?;
        }
        Ok(rules)
    }

    /// Parses a standalone rule file. Entries may sit at top level or
    /// under a `[rules]` table.
    pub fn parse(text: &str) -> Result<Self, RuleError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| RuleError::Parse(e.to_string()))?;
        match table.get("rules") {
            Some(toml::Value::Table(rules)) => Self::from_toml_table(rules),
            _ => Self::from_toml_table(&table),
        }
    }
}
