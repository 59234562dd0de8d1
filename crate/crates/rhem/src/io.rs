//! Text file formats: event streams, actor attributes, and the sampled
//! covariate CSV produced by the sampler and consumed by the estimator.
//!
//! All formats are plain UTF-8 CSV with LF line endings and no quoting;
//! actor labels may not contain `,` or `;`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{
    ActorId, ActorTable, AttrColumn, AttributeTable, EventStream, Hyperevent, RiskPolicy,
};

/// Column layout of an event file. The default matches
/// `TIME,SENDER,RECEIVERS` with `;`-separated receiver labels.
#[derive(Debug, Clone)]
pub struct EventFileSpec {
    pub time_column: String,
    pub sender_column: String,
    pub receivers_column: String,
    pub receiver_separator: char,
}

impl Default for EventFileSpec {
    fn default() -> Self {
        Self {
            time_column: "TIME".into(),
            sender_column: "SENDER".into(),
            receivers_column: "RECEIVERS".into(),
            receiver_separator: ';',
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Parses an event file into a validated stream.
///
/// `actors` supplies the actor universe: a sealed table (from an attribute
/// file) rejects unknown labels, an unsealed one is extended in first-seen
/// order. Duplicate receivers are deduplicated with a warning; decreasing
/// times, empty receiver sets, and self-loops are errors.
pub fn parse_events(
    path: &Path,
    format: &EventFileSpec,
    mut actors: ActorTable,
    policy: RiskPolicy,
) -> Result<EventStream> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    parse_events_from(BufReader::new(file), &path.display().to_string(), format, &mut actors)
        .and_then(|events| EventStream::new(actors, events, policy))
}

fn parse_events_from<R: BufRead>(
    reader: R,
    path: &str,
    format: &EventFileSpec,
    actors: &mut ActorTable,
) -> Result<Vec<Hyperevent>> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_string(),
        line,
        msg,
    };
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(h))) => h,
        Some((_, Err(e))) => {
            return Err(Error::Io { path: path.to_string(), source: e });
        }
        None => return Err(parse_err(1, "empty file (expected header)".into())),
    };
    let expected_header = format!(
        "{},{},{}",
        format.time_column, format.sender_column, format.receivers_column
    );
    if header.trim_end() != expected_header {
        return Err(parse_err(
            1,
            format!("bad header '{header}', expected '{expected_header}'"),
        ));
    }

    let mut events = Vec::new();
    let mut last_time = f64::NEG_INFINITY;
    for (lineno, line) in lines {
        let lineno = lineno + 1; // 1-based
        let line = line.map_err(|e| Error::Io { path: path.to_string(), source: e })?;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, ',');
        let (time_s, sender_s, recv_s) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(parse_err(lineno, "expected 3 comma-separated fields".into())),
        };
        let time: f64 = time_s
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad time '{time_s}'")))?;
        if !time.is_finite() || time < 0.0 {
            return Err(parse_err(lineno, format!("time must be finite and nonnegative, got {time}")));
        }
        if time < last_time {
            return Err(Error::DecreasingTime {
                path: path.to_string(),
                line: lineno,
                time,
                prev: last_time,
            });
        }
        last_time = time;

        let sender = actors.intern(sender_s).ok_or_else(|| Error::UnknownActor {
            path: path.to_string(),
            line: lineno,
            label: sender_s.to_string(),
        })?;

        let mut receivers: Vec<ActorId> = Vec::new();
        let mut saw_duplicate = false;
        for label in recv_s.split(format.receiver_separator) {
            if label.is_empty() {
                return Err(parse_err(lineno, "empty receiver label".into()));
            }
            let id = actors.intern(label).ok_or_else(|| Error::UnknownActor {
                path: path.to_string(),
                line: lineno,
                label: label.to_string(),
            })?;
            if id == sender {
                return Err(Error::SelfLoop {
                    path: path.to_string(),
                    line: lineno,
                    label: label.to_string(),
                });
            }
            if receivers.contains(&id) {
                saw_duplicate = true;
            } else {
                receivers.push(id);
            }
        }
        if receivers.is_empty() {
            return Err(Error::EmptyReceiverSet { path: path.to_string(), line: lineno });
        }
        if saw_duplicate {
            log::warn!("{path}:{lineno}: duplicate receivers deduplicated");
        }
        let index = events.len() as u64;
        events.push(Hyperevent::new(time, sender, receivers, index));
    }
    Ok(events)
}

/// Writes a stream in canonical form: times in shortest round-trip decimal
/// notation, receiver labels sorted lexicographically.
pub fn write_events<W: Write>(stream: &EventStream, format: &EventFileSpec, mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "{},{},{}",
        format.time_column, format.sender_column, format.receivers_column
    )?;
    let actors = stream.actors();
    for ev in stream.events() {
        let mut labels: Vec<&str> = ev.receivers.iter().map(|&j| actors.label(j)).collect();
        labels.sort_unstable();
        let joined = labels.join(&format.receiver_separator.to_string());
        writeln!(w, "{},{},{}", ev.time, actors.label(ev.sender), joined)?;
    }
    Ok(())
}

pub fn write_events_to_path(stream: &EventStream, format: &EventFileSpec, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    write_events(stream, format, BufWriter::new(file)).map_err(|e| io_err(path, e))
}

/// Parses an attribute file with header `ACTOR,<name>:<kind>,...`
/// (kind `num` or `cat`). Returns the sealed actor universe and the table.
pub fn parse_attributes(path: &Path) -> Result<(ActorTable, AttributeTable)> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    parse_attributes_from(BufReader::new(file), &path.display().to_string())
}

pub fn parse_attributes_from<R: BufRead>(reader: R, path: &str) -> Result<(ActorTable, AttributeTable)> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_string(),
        line,
        msg,
    };
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(h))) => h,
        Some((_, Err(e))) => return Err(Error::Io { path: path.to_string(), source: e }),
        None => return Err(parse_err(1, "empty file (expected header)".into())),
    };
    let mut cols = header.trim_end().split(',');
    if cols.next() != Some("ACTOR") {
        return Err(parse_err(1, "first header column must be 'ACTOR'".into()));
    }
    #[derive(Clone)]
    enum DeclKind {
        Num,
        Cat,
    }
    let mut decls: Vec<(String, DeclKind)> = Vec::new();
    for col in cols {
        let (name, kind) = col.split_once(':').ok_or_else(|| {
            parse_err(1, format!("attribute column '{col}' must be '<name>:<kind>'"))
        })?;
        let kind = match kind {
            "num" => DeclKind::Num,
            "cat" => DeclKind::Cat,
            other => {
                return Err(Error::UnknownKind { path: path.to_string(), kind: other.to_string() })
            }
        };
        decls.push((name.to_string(), kind));
    }

    let mut actors = ActorTable::new();
    let mut numeric: Vec<Vec<f64>> = vec![Vec::new(); decls.len()];
    let mut categorical: Vec<(Vec<u32>, Vec<String>)> = vec![(Vec::new(), Vec::new()); decls.len()];
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::Io { path: path.to_string(), source: e })?;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label = fields
            .next()
            .filter(|l| !l.is_empty())
            .ok_or_else(|| parse_err(lineno, "missing actor label".into()))?;
        if actors.get(label).is_some() {
            return Err(Error::DuplicateActor {
                path: path.to_string(),
                line: lineno,
                label: label.to_string(),
            });
        }
        actors.intern(label);
        for (i, (name, kind)) in decls.iter().enumerate() {
            let raw = fields.next().unwrap_or("");
            if raw.is_empty() {
                return Err(Error::MissingValue {
                    path: path.to_string(),
                    line: lineno,
                    attribute: name.clone(),
                });
            }
            match kind {
                DeclKind::Num => {
                    let v: f64 = match raw {
                        "true" => 1.0,
                        "false" => 0.0,
                        other => other.parse().map_err(|_| {
                            parse_err(lineno, format!("bad numeric value '{other}' for '{name}'"))
                        })?,
                    };
                    numeric[i].push(v);
                }
                DeclKind::Cat => {
                    let (codes, levels) = &mut categorical[i];
                    let code = match levels.iter().position(|l| l == raw) {
                        Some(pos) => pos as u32,
                        None => {
                            levels.push(raw.to_string());
                            (levels.len() - 1) as u32
                        }
                    };
                    codes.push(code);
                }
            }
        }
        if fields.next().is_some() {
            return Err(parse_err(lineno, "too many fields".into()));
        }
    }

    actors.seal();
    let mut table = AttributeTable::empty(actors.len());
    for (i, (name, kind)) in decls.iter().enumerate() {
        let column = match kind {
            DeclKind::Num => AttrColumn::Numeric(std::mem::take(&mut numeric[i])),
            DeclKind::Cat => {
                let (codes, levels) = std::mem::take(&mut categorical[i]);
                AttrColumn::Categorical { codes, levels }
            }
        };
        table.push(name, column)?;
    }
    Ok((actors, table))
}

/// Header metadata embedded as `# key=value` comment lines in artifact CSVs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArtifactMeta {
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
}

impl ArtifactMeta {
    pub fn comment_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        if let Some(seed) = self.seed {
            lines.push(format!("# seed={seed}"));
        }
        if let Some(hash) = &self.config_hash {
            lines.push(format!("# config_hash={hash}"));
        }
        lines
    }

    pub fn parse_comment(&mut self, line: &str) {
        let body = line.trim_start_matches('#').trim();
        if let Some((k, v)) = body.split_once('=') {
            match k.trim() {
                "seed" => self.seed = v.trim().parse().ok(),
                "config_hash" => self.config_hash = Some(v.trim().to_string()),
                _ => {}
            }
        }
    }
}

/// One row of the sampled covariate table.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub stratum: u64,
    pub is_case: bool,
    pub sender: ActorId,
    pub receivers: Vec<ActorId>,
    pub covariates: Vec<f64>,
}

/// In-memory form of a `sample` artifact:
/// `STRATUM,IS_CASE,SENDER,RECEIVERS,<covariate names...>`.
#[derive(Debug, Clone)]
pub struct SampleTable {
    pub meta: ArtifactMeta,
    pub covariate_names: Vec<String>,
    pub rows: Vec<SampleRow>,
}

pub fn write_sample_table<W: Write>(table: &SampleTable, actors: &ActorTable, mut w: W) -> std::io::Result<()> {
    for line in table.meta.comment_lines() {
        writeln!(w, "{line}")?;
    }
    write!(w, "STRATUM,IS_CASE,SENDER,RECEIVERS")?;
    for name in &table.covariate_names {
        write!(w, ",{name}")?;
    }
    writeln!(w)?;
    for row in &table.rows {
        let mut labels: Vec<&str> = row.receivers.iter().map(|&j| actors.label(j)).collect();
        labels.sort_unstable();
        write!(
            w,
            "{},{},{},{}",
            row.stratum,
            row.is_case as u8,
            actors.label(row.sender),
            labels.join(";")
        )?;
        for v in &row.covariates {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_sample_table<R: Read>(reader: R, path: &str, actors: &mut ActorTable) -> Result<SampleTable> {
    let reader = BufReader::new(reader);
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_string(),
        line,
        msg,
    };
    let mut meta = ArtifactMeta::default();
    let mut covariate_names: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::Io { path: path.to_string(), source: e })?;
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            meta.parse_comment(&line);
            continue;
        }
        if covariate_names.is_none() {
            let mut cols = line.trim_end().split(',');
            for expected in ["STRATUM", "IS_CASE", "SENDER", "RECEIVERS"] {
                if cols.next() != Some(expected) {
                    return Err(parse_err(lineno, format!("bad header, expected column '{expected}'")));
                }
            }
            covariate_names = Some(cols.map(str::to_string).collect());
            continue;
        }
        let names = covariate_names.as_ref().unwrap();
        let mut fields = line.split(',');
        let stratum: u64 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(lineno, "bad STRATUM".into()))?;
        let is_case = match fields.next() {
            Some("0") => false,
            Some("1") => true,
            _ => return Err(parse_err(lineno, "IS_CASE must be 0 or 1".into())),
        };
        let sender_label = fields.next().ok_or_else(|| parse_err(lineno, "missing SENDER".into()))?;
        let sender = actors.intern(sender_label).ok_or_else(|| Error::UnknownActor {
            path: path.to_string(),
            line: lineno,
            label: sender_label.to_string(),
        })?;
        let recv_field = fields.next().ok_or_else(|| parse_err(lineno, "missing RECEIVERS".into()))?;
        let mut receivers = Vec::new();
        for label in recv_field.split(';') {
            let id = actors.intern(label).ok_or_else(|| Error::UnknownActor {
                path: path.to_string(),
                line: lineno,
                label: label.to_string(),
            })?;
            receivers.push(id);
        }
        receivers.sort_unstable();
        let mut covariates = Vec::with_capacity(names.len());
        for name in names {
            let raw = fields.next().ok_or_else(|| {
                parse_err(lineno, format!("missing value for covariate '{name}'"))
            })?;
            let v: f64 = raw
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad value '{raw}' for '{name}'")))?;
            covariates.push(v);
        }
        if fields.next().is_some() {
            return Err(parse_err(lineno, "too many fields".into()));
        }
        rows.push(SampleRow {
            stratum,
            is_case,
            sender,
            receivers,
            covariates,
        });
    }
    Ok(SampleTable {
        meta,
        covariate_names: covariate_names.unwrap_or_default(),
        rows,
    })
}

pub fn read_sample_table_from_path(path: &Path, actors: &mut ActorTable) -> Result<SampleTable> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_sample_table(file, &path.display().to_string(), actors)
}

/// Writes the compact covariate artifact: `EVENT_INDEX,IS_CASE,<names...>`.
pub fn write_covariate_table<W: Write>(table: &SampleTable, mut w: W) -> std::io::Result<()> {
    for line in table.meta.comment_lines() {
        writeln!(w, "{line}")?;
    }
    write!(w, "EVENT_INDEX,IS_CASE")?;
    for name in &table.covariate_names {
        write!(w, ",{name}")?;
    }
    writeln!(w)?;
    for row in &table.rows {
        write!(w, "{},{}", row.stratum, row.is_case as u8)?;
        for v in &row.covariates {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse_str(text: &str) -> Result<EventStream> {
        let mut actors = ActorTable::new();
        parse_events_from(
            Cursor::new(text),
            "test.csv",
            &EventFileSpec::default(),
            &mut actors,
        )
        .and_then(|events| EventStream::new(actors, events, RiskPolicy::AllExceptSender))
    }

    #[test]
    fn parses_three_events_keeping_tie_order() {
        let s = parse_str("TIME,SENDER,RECEIVERS\n10,A,B\n20,B,C\n20,A,C;B\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(
            s.events().iter().map(|e| e.index).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        assert_eq!(s.events()[1].sender, s.actors().get("B").unwrap());
        assert_eq!(s.events()[2].sender, s.actors().get("A").unwrap());
    }

    #[test]
    fn deduplicates_receivers() {
        let s = parse_str("TIME,SENDER,RECEIVERS\n10,A,B;C;B\n").unwrap();
        let b = s.actors().get("B").unwrap();
        let c = s.actors().get("C").unwrap();
        assert_eq!(s.events()[0].receivers, {
            let mut v = vec![b, c];
            v.sort_unstable();
            v
        });
    }

    #[test]
    fn rejects_self_loop() {
        assert!(matches!(
            parse_str("TIME,SENDER,RECEIVERS\n10,A,A\n"),
            Err(Error::SelfLoop { .. })
        ));
    }

    #[test]
    fn rejects_decreasing_time() {
        assert!(matches!(
            parse_str("TIME,SENDER,RECEIVERS\n10,A,B\n5,A,B\n"),
            Err(Error::DecreasingTime { .. })
        ));
    }

    #[test]
    fn rejects_unknown_actor_when_sealed() {
        let (actors, _attrs) =
            parse_attributes_from(Cursor::new("ACTOR,x:num\nA,1\nB,0\n"), "attrs.csv").unwrap();
        let mut actors = actors;
        let err = parse_events_from(
            Cursor::new("TIME,SENDER,RECEIVERS\n1,A,Z\n"),
            "e.csv",
            &EventFileSpec::default(),
            &mut actors,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownActor { .. }));
    }

    #[test]
    fn canonical_roundtrip_is_byte_identical() {
        let text = "TIME,SENDER,RECEIVERS\n10,A,B\n20,B,A;C\n20.5,C,A;B\n";
        let s = parse_str(text).unwrap();
        let mut out = Vec::new();
        write_events(&s, &EventFileSpec::default(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn attribute_table_parses_kinds() {
        let text = "ACTOR,female:num,senior:num,dept:cat\nA,1,0,Legal\nB,0,1,Trading\nC,0,0,Other\n";
        let (actors, attrs) = parse_attributes_from(Cursor::new(text), "a.csv").unwrap();
        assert_eq!(actors.len(), 3);
        assert!(actors.is_sealed());
        assert_eq!(attrs.len(), 3);
        match attrs.get("female").unwrap() {
            AttrColumn::Numeric(v) => assert_eq!(v, &vec![1.0, 0.0, 0.0]),
            _ => panic!("expected numeric"),
        }
        match attrs.get("dept").unwrap() {
            AttrColumn::Categorical { codes, levels } => {
                assert_eq!(codes, &vec![0, 1, 2]);
                assert_eq!(levels, &vec!["Legal", "Trading", "Other"]);
            }
            _ => panic!("expected categorical"),
        }
    }

    #[test]
    fn attributes_empty_table_accepted() {
        let (actors, attrs) = parse_attributes_from(Cursor::new("ACTOR\nA\nB\n"), "a.csv").unwrap();
        assert_eq!(actors.len(), 2);
        assert!(attrs.is_empty());
    }

    #[test]
    fn attributes_duplicate_actor_rejected() {
        assert!(matches!(
            parse_attributes_from(Cursor::new("ACTOR,x:num\nA,1\nA,0\n"), "a.csv"),
            Err(Error::DuplicateActor { .. })
        ));
    }

    #[test]
    fn attributes_missing_value_rejected() {
        assert!(matches!(
            parse_attributes_from(Cursor::new("ACTOR,x:num\nA,\n"), "a.csv"),
            Err(Error::MissingValue { .. })
        ));
    }

    #[test]
    fn attributes_unknown_kind_rejected() {
        assert!(matches!(
            parse_attributes_from(Cursor::new("ACTOR,x:real\nA,1\n"), "a.csv"),
            Err(Error::UnknownKind { .. })
        ));
    }

    #[test]
    fn sample_table_roundtrip() {
        let mut actors = ActorTable::new();
        for l in ["A", "B", "C"] {
            actors.intern(l);
        }
        let table = SampleTable {
            meta: ArtifactMeta {
                seed: Some(7),
                config_hash: Some("cafe".into()),
            },
            covariate_names: vec!["reciprocation".into(), "out_in_pop".into()],
            rows: vec![
                SampleRow {
                    stratum: 0,
                    is_case: true,
                    sender: 0,
                    receivers: vec![1, 2],
                    covariates: vec![0.5, 1.0],
                },
                SampleRow {
                    stratum: 0,
                    is_case: false,
                    sender: 0,
                    receivers: vec![1],
                    covariates: vec![0.0, 0.25],
                },
            ],
        };
        let mut buf = Vec::new();
        write_sample_table(&table, &actors, &mut buf).unwrap();
        let mut actors2 = actors.clone();
        let parsed = read_sample_table(buf.as_slice(), "s.csv", &mut actors2).unwrap();
        assert_eq!(parsed.meta, table.meta);
        assert_eq!(parsed.covariate_names, table.covariate_names);
        assert_eq!(parsed.rows, table.rows);
    }
}
