//! Layered option resolution: command-line flag, then `PREDWAVE_*` environment
//! variable (both handled by clap), then the key-value config file, then the
//! built-in default.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use predwave::Error;

/// Values read from a flat TOML file (`key = value` per line).
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

fn normalise(key: &str) -> String {
    key.replace('-', "_")
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(format!("config file: {}", e.message())))?;
        let mut values = BTreeMap::new();
        for (k, v) in table {
            let s = match v {
                toml::Value::String(s) => s,
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => f.to_string(),
                toml::Value::Boolean(b) => b.to_string(),
                toml::Value::Array(items) => items
                    .iter()
                    .map(|i| match i {
                        toml::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                toml::Value::Datetime(_) | toml::Value::Table(_) => {
                    return Err(Error::Config(format!("config key `{k}` must hold a scalar or a list")))
                }
            };
            values.insert(normalise(&k), s);
        }
        Ok(ConfigFile { values })
    }

    /// Flag value if given, else the config-file value, parsed.
    pub fn pick<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, Error>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(&normalise(key)) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| Error::Config(format!("config key `{key}` = `{raw}`: {e}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &'static str, flag: Option<T>) -> Result<T, Error>
    where
        T::Err: std::fmt::Display,
    {
        self.pick(key, flag)?
            .ok_or_else(|| Error::Config(format!("missing required parameter `{key}` (flag --{key})")))
    }
}

/// Comma-separated list of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberList(pub Vec<f64>);

impl FromStr for NumberList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(NumberList)
    }
}

impl std::fmt::Display for NumberList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}
