use std::fmt::Write as _;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    /// 1-based.
    pub episode: usize,
    pub score: f64,
    /// Mean training loss over the episode's updates; `None` when no update ran.
    pub mean_loss: Option<f64>,
    /// Exploration rate used during the episode.
    pub epsilon: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub episodes: Vec<EpisodeLog>,
}

pub const CSV_HEADER: &str = "episode,score,mean_loss,epsilon";

impl RunLog {
    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.score).collect()
    }

    /// Trailing moving average; entry `i` averages episodes `i+1-window ..= i`
    /// (fewer at the start).
    pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
        let window = window.max(1);
        let mut out = Vec::with_capacity(values.len());
        let mut sum = 0.0;
        for i in 0..values.len() {
            sum += values[i];
            if i >= window {
                sum -= values[i - window];
            }
            out.push(sum / (i + 1).min(window) as f64);
        }
        out
    }

    /// CSV with header; numbers carry 6 significant digits, a missing loss is
    /// written as `NaN`.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(32 * (self.episodes.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for e in &self.episodes {
            let loss = e.mean_loss.map_or_else(|| "NaN".to_string(), |l| format_sig(l, 6));
            let _ = writeln!(
                s,
                "{},{},{},{}",
                e.episode,
                format_sig(e.score, 6),
                loss,
                format_sig(e.epsilon, 6)
            );
        }
        s
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}

/// `printf("%.{digits}g")`-style formatting.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
