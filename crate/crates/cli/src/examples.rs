//! Example configurations compiled into the binary.

pub struct Example {
    pub name: &'static str,
    pub file: &'static str,
    pub text: &'static str,
}

macro_rules! examples {
    ($($name:literal),* $(,)?) => {
        &[$(Example {
            name: $name,
            file: concat!("examples/", $name, ".toml"),
            text: include_str!(concat!("../examples/", $name, ".toml")),
        }),*]
    };
}

pub const ALL: &[Example] = examples![
    "roundtrip",
    "roundtrip_slow",
    "sudden_decoupling",
    "overlaps",
    "renormalized_tunneling",
    "entropy_cycle",
    "fringe_revival",
    "sudden_flip",
    "cutoff_sweep",
    "theta_sweep",
    "calibrate",
    "ode_match",
];

impl Example {
    /// First comment line of the file.
    pub fn description(&self) -> &'static str {
        self.text
            .lines()
            .find_map(|l| l.strip_prefix('#'))
            .map(str::trim)
            .unwrap_or("")
    }
}

pub fn find(name: &str) -> Option<&'static Example> {
    let name = name.trim_end_matches(".toml");
    ALL.iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;
    use crate::scenario::prepare;
    use std::path::Path;

    #[test]
    fn every_example_validates() {
        for e in ALL {
            let cfg = parse(e.text, Path::new(e.file)).unwrap();
            if cfg.sweep.is_none() {
                prepare(&cfg).unwrap_or_else(|err| panic!("{}: {err}", e.name));
            }
            assert!(!e.description().is_empty(), "{}", e.name);
        }
    }

    #[test]
    fn lookup_accepts_file_names() {
        assert_eq!(find("calibrate.toml").unwrap().name, "calibrate");
        assert!(find("nope").is_none());
    }
}
