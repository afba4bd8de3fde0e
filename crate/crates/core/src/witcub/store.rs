//! JSON-lines persistence: one header record, then one instance per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError, DatasetStats, WitCubInstance};

pub const FORMAT_NAME: &str = "witcub";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    stats: DatasetStats,
}

pub fn save_dataset<W: Write>(ds: &Dataset, mut sink: W) -> Result<(), DatasetError> {
    let header = Header { format: FORMAT_NAME.into(), version: FORMAT_VERSION, stats: ds.stats() };
    serde_json::to_writer(&mut sink, &header).map_err(std::io::Error::from)?;
    sink.write_all(b"\n")?;
    for instance in ds.instances() {
        serde_json::to_writer(&mut sink, instance).map_err(std::io::Error::from)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

pub fn load_dataset<R: BufRead>(source: R) -> Result<Dataset, DatasetError> {
    let mut lines = source.lines();
    let header_line = lines
        .next()
        .transpose()?
        .ok_or_else(|| DatasetError::Parse { line: 1, message: "missing header record".into() })?;
    let header: Header =
        serde_json::from_str(&header_line).map_err(|e| DatasetError::Parse { line: 1, message: e.to_string() })?;
    if header.format != FORMAT_NAME {
        return Err(DatasetError::Parse { line: 1, message: format!("unexpected format {:?}", header.format) });
    }
    if header.version != FORMAT_VERSION {
        return Err(DatasetError::Version { found: header.version, expected: FORMAT_VERSION });
    }

    let mut instances = Vec::with_capacity(header.stats.instance_count);
    let mut line_no = 1;
    for raw in lines {
        let raw = raw?;
        line_no += 1;
        if raw.trim().is_empty() {
            continue;
        }
        let instance: WitCubInstance =
            serde_json::from_str(&raw).map_err(|e| DatasetError::Parse { line: line_no, message: e.to_string() })?;
        validate(&instance).map_err(|message| DatasetError::Parse { line: line_no, message })?;
        instances.push(instance);
    }

    if instances.len() != header.stats.instance_count {
        return Err(DatasetError::Parse {
            line: line_no + 1,
            message: format!(
                "expected {} instances, found {} (truncated file?)",
                header.stats.instance_count,
                instances.len()
            ),
        });
    }
    let ds = Dataset::new(instances);
    if ds.stats() != header.stats {
        return Err(DatasetError::StatsMismatch { stored: header.stats, recomputed: ds.stats() });
    }
    Ok(ds)
}

fn validate(instance: &WitCubInstance) -> Result<(), String> {
    if instance.caption.trim().is_empty() {
        return Err(format!("instance {:?} has an empty caption", instance.id));
    }
    instance.entities.iter().try_for_each(|e| e.validate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::TokenCount;
    use crate::witcub::EntityEntry;

    fn sample() -> Dataset {
        Dataset::new(vec![
            WitCubInstance {
                id: "0001".into(),
                caption: "Phahurat Road in Phra Nakhon".into(),
                image_ref: "https://upload.wikimedia.org/a.jpg".into(),
                entities: vec![EntityEntry {
                    name: "Phahurat".into(),
                    description: "Phahurat is a market neighbourhood in Bangkok.".into(),
                    source_url: "https://en.wikipedia.org/wiki/Phahurat".into(),
                }],
                caption_token_count: TokenCount::new(7),
            },
            WitCubInstance {
                id: "0002".into(),
                caption: "Straße in Zürich — “quoted”".into(),
                image_ref: "images/b.png".into(),
                entities: vec![],
                caption_token_count: TokenCount::new(9),
            },
        ])
    }

    fn save(ds: &Dataset) -> Vec<u8> {
        let mut buf = Vec::new();
        save_dataset(ds, &mut buf).unwrap();
        buf
    }

    #[test]
    fn round_trip_is_identity() {
        let ds = sample();
        let back = load_dataset(save(&ds).as_slice()).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.instances()[1].caption.as_bytes(), ds.instances()[1].caption.as_bytes());
    }

    #[test]
    fn header_carries_format_and_version() {
        let text = String::from_utf8(save(&sample())).unwrap();
        let header: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(header["format"], "witcub");
        assert_eq!(header["version"], 1);
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let bytes = save(&sample());
        let cut = &bytes[..bytes.len() - 20];
        assert!(matches!(load_dataset(cut), Err(DatasetError::Parse { line: 3, .. })));
        // Cut exactly at a line boundary: the instance count gives it away.
        let text = String::from_utf8(bytes).unwrap();
        let two_lines: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
        assert!(matches!(load_dataset(two_lines.as_bytes()), Err(DatasetError::Parse { .. })));
    }

    #[test]
    fn version_mismatch() {
        let text = String::from_utf8(save(&sample())).unwrap().replacen("\"version\":1", "\"version\":2", 1);
        assert!(matches!(load_dataset(text.as_bytes()), Err(DatasetError::Version { found: 2, .. })));
    }

    #[test]
    fn tampered_stats_detected() {
        let text = String::from_utf8(save(&sample())).unwrap().replacen(
            "\"mean_caption_tokens\":8.0",
            "\"mean_caption_tokens\":9.0",
            1,
        );
        assert!(matches!(load_dataset(text.as_bytes()), Err(DatasetError::StatsMismatch { .. })));
    }

    #[test]
    fn empty_source_is_a_parse_error() {
        assert!(matches!(load_dataset(&b""[..]), Err(DatasetError::Parse { line: 1, .. })));
    }
}
