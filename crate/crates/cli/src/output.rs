//! Report serialization. JSON numbers are written with 17 significant
//! digits (`d.dddddddddddddddde±x`); non-finite values become `null`.

use std::io;

use anyhow::Result;
use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};
use wellcond_core::SelectionReport;

use crate::formats::format_f64;

struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SignificantDigits);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

/// Compact JSON with default float formatting, used only in tests to check
/// that the custom formatter changes nothing but the numbers.
#[cfg(test)]
fn to_plain_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::new(&mut buf);
    value.serialize(&mut ser).unwrap();
    String::from_utf8(buf).unwrap()
}

/// Long-form CSV: one row per eigenvalue `lambda_{k,r}`.
pub fn report_csv(report: &SelectionReport) -> String {
    let mut out =
        String::from("step,selected_index,score,mean_score,k,lambda,lower,upper,within_envelope\n");
    let mut checks = report.envelope_checks.iter();
    for (ri, spectrum) in report.trajectory.iter().enumerate() {
        let score = &report.scores[ri];
        for _ in spectrum {
            let c = checks.next().expect("one check per eigenvalue");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                score.step,
                score.index,
                format_f64(score.score),
                format_f64(score.mean_score),
                c.k,
                format_f64(c.lambda),
                format_f64(c.lower),
                format_f64(c.upper),
                c.pass
            ));
        }
    }
    out
}

pub fn parse_report(text: &str) -> Result<SelectionReport> {
    Ok(serde_json::from_str(text)?)
}
