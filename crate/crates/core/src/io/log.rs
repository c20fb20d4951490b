use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Pose, Rect};
use crate::sensors::{LaserObs, Observation, SonarObs, DEFAULT_LASER_MAX_RANGE, DEFAULT_SONAR_MAX_RANGE};
use crate::sim::ScanRecord;

/// A localized range log.
///
/// Text form, one record per line:
///
/// ```text
/// # window <min_x> <min_y> <max_x> <max_y>
/// # laser_max_range <meters>
/// # sonar_max_range <meters>
/// LASER <t> <x> <y> <theta> <bearing> <range> <maxflag>
/// SONAR <t> <x> <y> <theta> <bearing> <half_angle> <range> <maxflag>
/// ```
///
/// Other `#` lines and blank lines are ignored. Header lines may appear
/// anywhere and apply to the whole file.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanLog {
    pub window: Option<Rect>,
    pub laser_max_range: f64,
    pub sonar_max_range: f64,
    pub records: Vec<ScanRecord>,
}

impl Default for ScanLog {
    fn default() -> Self {
        ScanLog {
            window: None,
            laser_max_range: DEFAULT_LASER_MAX_RANGE,
            sonar_max_range: DEFAULT_SONAR_MAX_RANGE,
            records: Vec::new(),
        }
    }
}

fn parse_field<T: std::str::FromStr>(tok: &str, what: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad {what} {tok:?}"),
    })
}

fn parse_flag(tok: &str, line: usize) -> Result<bool> {
    match tok {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::Parse {
            line,
            msg: format!("maxflag must be 0 or 1, got {tok:?}"),
        }),
    }
}

fn expect_fields(toks: &[&str], n: usize, line: usize) -> Result<()> {
    if toks.len() != n {
        return Err(Error::Parse {
            line,
            msg: format!("{} expects {} fields, got {}", toks[0], n - 1, toks.len() - 1),
        });
    }
    Ok(())
}

impl ScanLog {
    /// Log holding `records`, with max ranges taken from the records
    /// themselves. Fails if one sensor type uses several max ranges.
    pub fn from_records(window: Option<Rect>, records: Vec<ScanRecord>) -> Result<Self> {
        let mut log = ScanLog {
            window,
            ..Default::default()
        };
        let pick = |sel: fn(&Observation) -> Option<f64>, default: f64| -> Result<f64> {
            let mut it = records.iter().filter_map(|r| sel(&r.obs));
            let Some(first) = it.next() else {
                return Ok(default);
            };
            if it.any(|m| m != first) {
                return Err(Error::Config("a log carries one max range per sensor type".into()));
            }
            Ok(first)
        };
        log.laser_max_range = pick(
            |o| match o {
                Observation::Laser(l) => Some(l.max_range),
                _ => None,
            },
            DEFAULT_LASER_MAX_RANGE,
        )?;
        log.sonar_max_range = pick(
            |o| match o {
                Observation::Sonar(s) => Some(s.max_range),
                _ => None,
            },
            DEFAULT_SONAR_MAX_RANGE,
        )?;
        if records.iter().any(|r| matches!(r.obs, Observation::Point(_))) {
            return Err(Error::Config("point-color observations have no log representation".into()));
        }
        log.records = records;
        Ok(log)
    }

    pub fn observations(&self) -> Vec<Observation> {
        self.records.iter().map(|r| r.obs).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut log = ScanLog::default();
        let lines: Vec<(usize, Vec<&str>)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
            .filter(|(_, t)| !t.is_empty())
            .collect();
        for (line, toks) in lines.iter().filter(|(_, t)| t[0] == "#" && t.len() > 1) {
            let line = *line;
            match toks[1] {
                "window" => {
                    if toks.len() != 6 {
                        return Err(Error::Parse {
                            line,
                            msg: "window header needs four numbers".into(),
                        });
                    }
                    let v: Vec<f64> = toks[2..]
                        .iter()
                        .map(|t| parse_field(t, "window bound", line))
                        .collect::<Result<_>>()?;
                    let rect = Rect::new(Point2::new(v[0], v[1]), Point2::new(v[2], v[3])).map_err(|e| Error::Parse {
                        line,
                        msg: e.to_string(),
                    })?;
                    log.window = Some(rect);
                }
                "laser_max_range" | "sonar_max_range" => {
                    if toks.len() != 3 {
                        return Err(Error::Parse {
                            line,
                            msg: format!("{} header needs one number", toks[1]),
                        });
                    }
                    let v: f64 = parse_field(toks[2], "max range", line)?;
                    if toks[1] == "laser_max_range" {
                        log.laser_max_range = v;
                    } else {
                        log.sonar_max_range = v;
                    }
                }
                _ => {}
            }
        }
        for (line, toks) in &lines {
            let line = *line;
            if toks[0].starts_with('#') {
                continue;
            }
            let nums = |from: usize, to: usize| -> Result<Vec<f64>> {
                toks[from..to].iter().map(|t| parse_field(t, "number", line)).collect()
            };
            let wrap = |e: Error| Error::Parse {
                line,
                msg: e.to_string(),
            };
            let (t, obs) = match toks[0] {
                "LASER" => {
                    expect_fields(toks, 8, line)?;
                    let v = nums(1, 7)?;
                    let flag = parse_flag(toks[7], line)?;
                    let o = LaserObs::new(Pose::new(v[1], v[2], v[3]), v[4], v[5], log.laser_max_range, flag)
                        .map_err(wrap)?;
                    (v[0], Observation::Laser(o))
                }
                "SONAR" => {
                    expect_fields(toks, 9, line)?;
                    let v = nums(1, 8)?;
                    let flag = parse_flag(toks[8], line)?;
                    let o = SonarObs::new(Pose::new(v[1], v[2], v[3]), v[4], v[5], v[6], log.sonar_max_range, flag)
                        .map_err(wrap)?;
                    (v[0], Observation::Sonar(o))
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown record type {other:?}"),
                    })
                }
            };
            if let Some(w) = &log.window {
                if !w.contains(obs.origin()) {
                    return Err(Error::Parse {
                        line,
                        msg: "pose lies outside the window".into(),
                    });
                }
            }
            log.records.push(ScanRecord { t, obs });
        }
        Ok(log)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# polymap scan log\n");
        if let Some(w) = &self.window {
            writeln!(s, "# window {} {} {} {}", w.min.x, w.min.y, w.max.x, w.max.y).unwrap();
        }
        writeln!(s, "# laser_max_range {}", self.laser_max_range).unwrap();
        writeln!(s, "# sonar_max_range {}", self.sonar_max_range).unwrap();
        for r in &self.records {
            match &r.obs {
                Observation::Laser(o) => writeln!(
                    s,
                    "LASER {} {} {} {} {} {} {}",
                    r.t, o.pose.pos.x, o.pose.pos.y, o.pose.heading, o.bearing, o.range, o.max_flag as u8
                ),
                Observation::Sonar(o) => writeln!(
                    s,
                    "SONAR {} {} {} {} {} {} {} {}",
                    r.t,
                    o.pose.pos.x,
                    o.pose.pos.y,
                    o.pose.heading,
                    o.bearing,
                    o.half_angle,
                    o.range,
                    o.max_flag as u8
                ),
                Observation::Point(_) => Ok(()),
            }
            .unwrap();
        }
        s
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        ScanLog::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensors::DEFAULT_SONAR_HALF_ANGLE;
    use proptest::prelude::*;

    fn sample_log() -> ScanLog {
        let pose = Pose::new(1.25, 0.5, 0.1);
        let records = vec![
            ScanRecord {
                t: 0.0,
                obs: Observation::Laser(LaserObs::new(pose, -0.3, 2.0 / 3.0, 8.0, false).unwrap()),
            },
            ScanRecord {
                t: 0.5,
                obs: Observation::Laser(LaserObs::new(pose, 0.3, 8.0, 8.0, true).unwrap()),
            },
            ScanRecord {
                t: 0.5,
                obs: Observation::Sonar(SonarObs::new(pose, 1.0, DEFAULT_SONAR_HALF_ANGLE, 3.5, 3.5, true).unwrap()),
            },
        ];
        ScanLog::from_records(Some(Rect::from_size(4.0, 2.0).unwrap()), records).unwrap()
    }

    #[test]
    fn text_round_trip() {
        let log = sample_log();
        assert_eq!(ScanLog::parse(&log.to_text()).unwrap(), log);
    }

    #[test]
    fn errors_name_the_line() {
        let text = sample_log().to_text().replace("LASER 0.5", "LASER zero");
        match ScanLog::parse(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
        let bad_flag = "# laser_max_range 8\nLASER 0 1 1 0 0 8 2\n";
        assert!(matches!(ScanLog::parse(bad_flag), Err(Error::Parse { line: 2, .. })));
        let outside = "# window 0 0 1 1\n\nLASER 0 2 2 0 0 1 0\n";
        assert!(matches!(ScanLog::parse(outside), Err(Error::Parse { line: 3, .. })));
        let beyond = "LASER 0 1 1 0 0 9 0\n";
        assert!(matches!(ScanLog::parse(beyond), Err(Error::Parse { line: 1, .. })));
        let short = "SONAR 0 1 1 0 0 0.17 1\n";
        assert!(matches!(ScanLog::parse(short), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_log_parses() {
        let log = ScanLog::parse("").unwrap();
        assert!(log.records.is_empty());
        assert_eq!(log.window, None);
    }

    #[test]
    fn mixed_max_ranges_are_refused() {
        let mut log = sample_log();
        let pose = Pose::new(1.0, 1.0, 0.0);
        log.records.push(ScanRecord {
            t: 1.0,
            obs: Observation::Laser(LaserObs::new(pose, 0.0, 1.0, 4.0, false).unwrap()),
        });
        assert!(ScanLog::from_records(log.window, log.records).is_err());
    }

    proptest! {
        #[test]
        fn arbitrary_readings_round_trip(
            x in 0.0..4.0f64, y in 0.0..2.0f64, th in -4.0..4.0f64, b in -4.0..4.0f64,
            frac in 1e-6..1.0f64, flag: bool, sonar: bool, t in 0.0..1e6f64,
        ) {
            let pose = Pose::new(x, y, th);
            let obs = if sonar {
                let r = if flag { 3.5 } else { 3.5 * frac };
                Observation::Sonar(SonarObs::new(pose, b, DEFAULT_SONAR_HALF_ANGLE, r, 3.5, flag).unwrap())
            } else {
                let r = if flag { 8.0 } else { 8.0 * frac };
                Observation::Laser(LaserObs::new(pose, b, r, 8.0, flag).unwrap())
            };
            let log = ScanLog::from_records(Some(Rect::from_size(4.0, 2.0).unwrap()), vec![ScanRecord { t, obs }]).unwrap();
            prop_assert_eq!(ScanLog::parse(&log.to_text()).unwrap(), log);
        }
    }
}
