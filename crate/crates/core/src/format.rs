//! Text format for equation systems.
//!
//! ```text
//! # vars=4 eliminated=x0
//! # cipher=toy
//! [F2]
//! x1*x2 + x3
//! [F3]
//! x1*x2*x3 + 1
//! ```
//!
//! The first line gives the number of variables and the variables already
//! eliminated (comma separated, possibly empty). Further `# key=value` lines
//! carry free-form metadata. Each polynomial sits on its own line in
//! canonical form, so writing the same system twice gives identical bytes.

use std::fmt::Write as _;

use crate::boolring::{parse_poly, Var, MAX_VARS};
use crate::elim::PolySystem;
use crate::error::{Error, Result};

/// A system together with its header fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemFile {
    /// Variables are `x0..x(vars-1)`.
    pub vars: usize,
    pub system: PolySystem,
    /// Metadata lines in file order.
    pub meta: Vec<(String, String)>,
}

impl SystemFile {
    pub fn new(system: PolySystem, vars: usize) -> SystemFile {
        SystemFile {
            vars,
            system,
            meta: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> SystemFile {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    /// Value of the first metadata line with this key.
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let eliminated: Vec<String> = self
            .system
            .eliminated()
            .iter()
            .map(|v| format!("x{v}"))
            .collect();
        writeln!(out, "# vars={} eliminated={}", self.vars, eliminated.join(",")).unwrap();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}={v}").unwrap();
        }
        out.push_str("[F2]\n");
        for p in self.system.f2() {
            writeln!(out, "{p}").unwrap();
        }
        out.push_str("[F3]\n");
        for p in self.system.f3() {
            writeln!(out, "{p}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<SystemFile> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let (vars, eliminated) = parse_header(header)?;

        let mut meta = Vec::new();
        let mut f2 = Vec::new();
        let mut f3 = Vec::new();
        let mut section: Option<bool> = None; // Some(true) = F2, Some(false) = F3
        for (line, l) in lines {
            if l.is_empty() {
                continue;
            }
            if let Some(rest) = l.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            match l {
                "[F2]" => section = Some(true),
                "[F3]" => section = Some(false),
                _ => {
                    let p = parse_poly(l, line)?;
                    match section {
                        Some(true) => f2.push(p),
                        Some(false) => f3.push(p),
                        None => {
                            return Err(Error::Parse {
                                line,
                                msg: "polynomial before any [F2]/[F3] section".into(),
                            })
                        }
                    }
                }
            }
        }

        let mut live = if vars >= MAX_VARS {
            u128::MAX
        } else {
            (1u128 << vars) - 1
        };
        for &v in &eliminated {
            live &= !(1u128 << v);
        }
        let system = PolySystem::new(f2, f3, live)
            .map_err(|e| Error::Parse {
                line: 0,
                msg: e.to_string(),
            })?
            .with_eliminated(eliminated);
        Ok(SystemFile { vars, system, meta })
    }
}

fn parse_var(s: &str, line: usize) -> Result<Var> {
    let digits = s.strip_prefix('x').unwrap_or(s);
    let v: Var = digits.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad variable `{s}`"),
    })?;
    if v >= MAX_VARS {
        return Err(Error::Parse {
            line,
            msg: Error::VariableOutOfRange(v).to_string(),
        });
    }
    Ok(v)
}

fn parse_header(header: &str) -> Result<(usize, Vec<Var>)> {
    let err = |msg: &str| Error::Parse {
        line: 1,
        msg: msg.to_string(),
    };
    let body = header
        .strip_prefix('#')
        .ok_or_else(|| err("expected `# vars=<n> eliminated=<list>` header"))?;
    let mut vars = None;
    let mut eliminated = Vec::new();
    for field in body.split_whitespace() {
        match field.split_once('=') {
            Some(("vars", n)) => {
                let n: usize = n.parse().map_err(|_| err("bad vars count"))?;
                if n > MAX_VARS {
                    return Err(err("too many variables"));
                }
                vars = Some(n);
            }
            Some(("eliminated", list)) => {
                for item in list.split(',').filter(|s| !s.is_empty()) {
                    eliminated.push(parse_var(item, 1)?);
                }
            }
            _ => return Err(err(&format!("unknown header field `{field}`"))),
        }
    }
    Ok((vars.ok_or_else(|| err("missing vars="))?, eliminated))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "# vars=4 eliminated=x0\n# cipher=toy\n[F2]\nx1*x2 + x3\n[F3]\nx1*x2*x3 + 1\n";
        let file = SystemFile::parse(text).unwrap();
        assert_eq!(file.vars, 4);
        assert_eq!(file.system.eliminated(), &[0]);
        assert_eq!(file.meta("cipher"), Some("toy"));
        assert_eq!(file.system.f2().len(), 1);
        assert_eq!(file.to_text(), text);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SystemFile::parse("").is_err());
        assert!(SystemFile::parse("# vars=3\nx1\n").is_err());
        assert!(SystemFile::parse("# vars=3\n[F2]\nx7\n").is_err());
        assert!(SystemFile::parse("# vars=3 eliminated=x1\n[F2]\nx1 + x2\n").is_err());
        assert!(SystemFile::parse("# vars=3\n[F2]\nx0*x1*x2\n").is_err());
    }
}
