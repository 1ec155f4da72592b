//! The event-stream file format and the synthetic classification task
//! generator.
//!
//! An event file is CSV-like text:
//!
//! ```text
//! # n_inputs=64
//! # duration_ms=240
//! neuron_id,time_ms,label
//! sample,0,2
//! 5,12,
//! 17,12,
//! sample,1,0
//! ...
//! ```
//!
//! `#` metadata lines declare the input width and the per-sample duration and
//! must precede the header. The header is `neuron_id,time_ms` or
//! `neuron_id,time_ms,label`. A `sample,<index>,<label>` record starts a new
//! sample (`label` may be empty); a file with no sample records is one
//! unlabeled sample. Event times must be non-decreasing within a sample,
//! below the declared duration, and ids below the declared width. Parsing is
//! strict: any malformed line fails with its line number.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lif::SpikeRaster;
use crate::rng::seeded_rng;
use rand::Rng;

/// One sample: its events (in file order) and an optional class label.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSample {
    pub events: Vec<(u32, u32)>,
    pub label: Option<u32>,
}

impl EventSample {
    pub fn to_raster(&self, n_inputs: usize, duration_ms: u32) -> Result<SpikeRaster> {
        SpikeRaster::from_events(n_inputs, duration_ms, self.events.iter().copied())
    }
}

/// A parsed event file.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    pub n_inputs: usize,
    pub duration_ms: u32,
    pub samples: Vec<EventSample>,
}

impl EventStream {
    pub fn is_labeled(&self) -> bool {
        self.samples.iter().all(|s| s.label.is_some()) && !self.samples.is_empty()
    }

    /// Distinct labels in ascending order.
    pub fn classes(&self) -> Vec<u32> {
        let mut labels: Vec<u32> = self.samples.iter().filter_map(|s| s.label).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }
}

pub fn load_events(path: impl AsRef<Path>) -> Result<EventStream> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_events(&text, path)
}

fn parse_events(text: &str, path: &Path) -> Result<EventStream> {
    let mut n_inputs: Option<usize> = None;
    let mut duration_ms: Option<u32> = None;
    let mut header_seen = false;
    let mut samples: Vec<EventSample> = Vec::new();
    let mut implicit_sample = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if header_seen {
                return Err(Error::parse(path, line_no, "metadata after the header"));
            }
            let meta = meta.trim();
            let (key, value) = meta
                .split_once('=')
                .ok_or_else(|| Error::parse(path, line_no, "metadata must be key=value"))?;
            match key.trim() {
                "n_inputs" => {
                    n_inputs = Some(value.trim().parse().map_err(|_| {
                        Error::parse(path, line_no, format!("invalid n_inputs '{}'", value.trim()))
                    })?)
                }
                "duration_ms" => {
                    duration_ms = Some(value.trim().parse().map_err(|_| {
                        Error::parse(path, line_no, format!("invalid duration_ms '{}'", value.trim()))
                    })?)
                }
                other => {
                    return Err(Error::parse(path, line_no, format!("unknown metadata key '{other}'")));
                }
            }
            continue;
        }
        if !header_seen {
            if line != "neuron_id,time_ms" && line != "neuron_id,time_ms,label" {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected header 'neuron_id,time_ms[,label]', got '{line}'"),
                ));
            }
            if n_inputs.is_none() || duration_ms.is_none() {
                return Err(Error::parse(
                    path,
                    line_no,
                    "missing '# n_inputs=...' or '# duration_ms=...' metadata before the header",
                ));
            }
            header_seen = true;
            continue;
        }

        let width = n_inputs.unwrap();
        let duration = duration_ms.unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(Error::parse(path, line_no, format!("expected 2 or 3 fields, got {}", fields.len())));
        }

        if fields[0] == "sample" {
            if implicit_sample {
                return Err(Error::parse(
                    path,
                    line_no,
                    "sample record after events that belong to no sample",
                ));
            }
            let index: usize = fields[1]
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("invalid sample index '{}'", fields[1])))?;
            if index != samples.len() {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("sample index {index} out of order, expected {}", samples.len()),
                ));
            }
            let label = match fields.get(2).map(|s| s.trim()) {
                None | Some("") => None,
                Some(text) => Some(text.parse().map_err(|_| {
                    Error::parse(path, line_no, format!("invalid label '{text}'"))
                })?),
            };
            samples.push(EventSample {
                events: Vec::new(),
                label,
            });
            continue;
        }

        let neuron: u32 = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("invalid neuron id '{}'", fields[0])))?;
        let t: u32 = fields[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("invalid time '{}'", fields[1])))?;
        if let Some(extra) = fields.get(2) {
            if !extra.trim().is_empty() {
                return Err(Error::parse(path, line_no, "event lines must leave the label field empty"));
            }
        }
        if neuron as usize >= width {
            return Err(Error::parse(
                path,
                line_no,
                format!("neuron id {neuron} outside declared width {width}"),
            ));
        }
        if t >= duration {
            return Err(Error::parse(
                path,
                line_no,
                format!("event time {t} ms beyond declared duration {duration} ms"),
            ));
        }
        if samples.is_empty() {
            samples.push(EventSample {
                events: Vec::new(),
                label: None,
            });
            implicit_sample = true;
        }
        let sample = samples.last_mut().unwrap();
        if let Some(&(_, prev)) = sample.events.last() {
            if t < prev {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("event time {t} decreases within the sample (previous {prev})"),
                ));
            }
        }
        sample.events.push((neuron, t));
    }

    if !header_seen {
        return Err(Error::parse(path, 1, "missing header line"));
    }
    Ok(EventStream {
        n_inputs: n_inputs.unwrap(),
        duration_ms: duration_ms.unwrap(),
        samples,
    })
}

pub fn save_events(stream: &EventStream, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&format!("# n_inputs={}\n", stream.n_inputs));
    out.push_str(&format!("# duration_ms={}\n", stream.duration_ms));
    let labeled = stream.samples.iter().any(|s| s.label.is_some());
    out.push_str(if labeled { "neuron_id,time_ms,label\n" } else { "neuron_id,time_ms\n" });
    let single_unlabeled = stream.samples.len() == 1 && !labeled;
    for (idx, sample) in stream.samples.iter().enumerate() {
        if !single_unlabeled {
            match sample.label {
                Some(label) => out.push_str(&format!("sample,{idx},{label}\n")),
                None => out.push_str(&format!("sample,{idx},\n")),
            }
        }
        let mut events = sample.events.clone();
        events.sort_by_key(|&(k, t)| (t, k));
        for (neuron, t) in events {
            if labeled {
                out.push_str(&format!("{neuron},{t},\n"));
            } else {
                out.push_str(&format!("{neuron},{t}\n"));
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Configuration of the synthetic spatiotemporal classification task. Each
/// class owns a fixed random rate template over (channel, time segment)
/// cells; samples are Poisson realizations of their class template with a
/// small Gaussian time jitter per event.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SyntheticTaskConfig {
    pub n_classes: usize,
    pub n_inputs: usize,
    pub duration_ms: u32,
    pub segments: usize,
    pub samples_per_class: usize,
    /// Fraction of (channel, segment) cells driven at the hot rate.
    pub hot_fraction: f64,
    pub rate_hot_hz: f64,
    pub rate_base_hz: f64,
    pub jitter_std_ms: f64,
    pub seed: u64,
}

impl Default for SyntheticTaskConfig {
    fn default() -> Self {
        SyntheticTaskConfig {
            n_classes: 4,
            n_inputs: 64,
            duration_ms: 240,
            segments: 4,
            samples_per_class: 20,
            hot_fraction: 0.25,
            rate_hot_hz: 60.0,
            rate_base_hz: 2.0,
            jitter_std_ms: 2.0,
            seed: 0,
        }
    }
}

/// Generate a labeled stream, samples ordered class-major then repetition.
pub fn generate_synthetic(cfg: &SyntheticTaskConfig) -> Result<EventStream> {
    if cfg.n_classes == 0 || cfg.n_inputs == 0 || cfg.segments == 0 || cfg.duration_ms == 0 {
        return Err(Error::InvalidParameter("synthetic task dimensions must be positive".into()));
    }
    let mut rng = seeded_rng(cfg.seed, 101);
    // Class templates: per (channel, segment), hot or base rate.
    let mut templates = Vec::with_capacity(cfg.n_classes);
    for _ in 0..cfg.n_classes {
        let hot: Vec<bool> = (0..cfg.n_inputs * cfg.segments)
            .map(|_| rng.gen::<f64>() < cfg.hot_fraction)
            .collect();
        templates.push(hot);
    }
    let seg_len = (cfg.duration_ms as f64 / cfg.segments as f64).ceil() as u32;

    let mut samples = Vec::new();
    for class in 0..cfg.n_classes {
        for _rep in 0..cfg.samples_per_class {
            let mut events = Vec::new();
            for t in 0..cfg.duration_ms {
                let seg = ((t / seg_len) as usize).min(cfg.segments - 1);
                for ch in 0..cfg.n_inputs {
                    let rate = if templates[class][ch * cfg.segments + seg] {
                        cfg.rate_hot_hz
                    } else {
                        cfg.rate_base_hz
                    };
                    if rng.gen::<f64>() < (rate / 1000.0).min(1.0) {
                        let jitter = gaussian(&mut rng) * cfg.jitter_std_ms;
                        let tj = (t as f64 + jitter).round().clamp(0.0, cfg.duration_ms as f64 - 1.0) as u32;
                        events.push((ch as u32, tj));
                    }
                }
            }
            events.sort_by_key(|&(k, t)| (t, k));
            events.dedup();
            samples.push(EventSample {
                events,
                label: Some(class as u32),
            });
        }
    }
    Ok(EventStream {
        n_inputs: cfg.n_inputs,
        duration_ms: cfg.duration_ms,
        samples,
    })
}

/// Box-Muller standard normal.
fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Concatenate samples back-to-back (in the given order, with an optional
/// inter-sample gap) into one continuous raster, truncated or cycled to
/// `total_ms`.
pub fn concatenate_samples(
    stream: &EventStream,
    order: &[usize],
    gap_ms: u32,
    total_ms: u32,
) -> Result<SpikeRaster> {
    if order.is_empty() {
        return Err(Error::InvalidParameter("no samples to concatenate".into()));
    }
    let mut raster = SpikeRaster::new(stream.n_inputs, total_ms);
    let stride = stream.duration_ms + gap_ms;
    let mut offset = 0u32;
    let mut cursor = 0usize;
    while offset < total_ms {
        let sample = &stream.samples[order[cursor % order.len()]];
        for &(neuron, t) in &sample.events {
            let at = offset + t;
            if at < total_ms {
                raster.add_spike(neuron, at)?;
            }
        }
        offset += stride;
        cursor += 1;
    }
    // Events in a step may arrive unsorted across samples; normalize.
    SpikeRaster::from_events(stream.n_inputs, total_ms, raster.iter_events())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn roundtrip(stream: &EventStream) -> EventStream {
        let dir = tempdir().unwrap();
        let path = dir.path().join("events.csv");
        save_events(stream, &path).unwrap();
        load_events(&path).unwrap()
    }

    #[test]
    fn roundtrip_identity_on_labeled_stream() {
        let stream = EventStream {
            n_inputs: 8,
            duration_ms: 50,
            samples: vec![
                EventSample {
                    events: vec![(0, 1), (3, 1), (7, 49)],
                    label: Some(2),
                },
                EventSample {
                    events: vec![(5, 0)],
                    label: Some(0),
                },
            ],
        };
        assert_eq!(roundtrip(&stream), stream);
    }

    #[test]
    fn roundtrip_identity_on_random_rasters() {
        let cfg = SyntheticTaskConfig {
            samples_per_class: 3,
            ..SyntheticTaskConfig::default()
        };
        let stream = generate_synthetic(&cfg).unwrap();
        assert_eq!(stream.samples.len(), 12);
        assert!(stream.is_labeled());
        assert_eq!(roundtrip(&stream), stream);
    }

    #[test]
    fn empty_file_with_header_is_zero_samples() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "# n_inputs=4\n# duration_ms=10\nneuron_id,time_ms\n").unwrap();
        let stream = load_events(&path).unwrap();
        assert_eq!(stream.samples.len(), 0);
        assert_eq!(stream.n_inputs, 4);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        // Event time beyond declared duration on line 5.
        std::fs::write(
            &path,
            "# n_inputs=4\n# duration_ms=10\nneuron_id,time_ms\n1,2\n1,10\n",
        )
        .unwrap();
        match load_events(&path).unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 5);
                assert!(message.contains("beyond declared duration"));
            }
            other => panic!("unexpected error {other:?}"),
        }

        std::fs::write(&path, "# n_inputs=4\n# duration_ms=10\nneuron_id,time_ms\nx,2\n").unwrap();
        match load_events(&path).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected error {other:?}"),
        }

        // Non-monotone times within a sample.
        std::fs::write(&path, "# n_inputs=4\n# duration_ms=10\nneuron_id,time_ms\n1,5\n1,2\n").unwrap();
        assert!(load_events(&path).is_err());

        // Missing metadata.
        std::fs::write(&path, "neuron_id,time_ms\n").unwrap();
        assert!(load_events(&path).is_err());
    }

    #[test]
    fn synthetic_task_is_deterministic_and_class_distinct() {
        let cfg = SyntheticTaskConfig {
            samples_per_class: 2,
            ..SyntheticTaskConfig::default()
        };
        let a = generate_synthetic(&cfg).unwrap();
        let b = generate_synthetic(&cfg).unwrap();
        assert_eq!(a, b);
        // Different classes produce visibly different activity per channel.
        let count_per_channel = |s: &EventSample| {
            let mut counts = vec![0usize; cfg.n_inputs];
            for &(ch, _) in &s.events {
                counts[ch as usize] += 1;
            }
            counts
        };
        let c0 = count_per_channel(&a.samples[0]);
        let c1 = count_per_channel(&a.samples[2 * cfg.samples_per_class]);
        assert_ne!(c0, c1);
    }

    #[test]
    fn concatenation_tiles_samples() {
        let stream = EventStream {
            n_inputs: 2,
            duration_ms: 10,
            samples: vec![EventSample {
                events: vec![(0, 3)],
                label: None,
            }],
        };
        let raster = concatenate_samples(&stream, &[0], 0, 25).unwrap();
        assert!(raster.contains(0, 3));
        assert!(raster.contains(0, 13));
        assert!(raster.contains(0, 23));
        assert_eq!(raster.total_spikes(), 3);
        let gapped = concatenate_samples(&stream, &[0], 5, 25).unwrap();
        assert!(gapped.contains(0, 3) && gapped.contains(0, 18));
        assert_eq!(gapped.total_spikes(), 2);
    }
}
