use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::variant::{CoeffRange, SignalVariant};
use crate::Result;

/// One variant of a suite. `form_id` indexes the skeleton the variant was
/// drawn from; `skeleton` repeats it in text form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: usize,
    pub form_id: usize,
    pub skeleton: String,
    pub variant: SignalVariant,
}

/// A benchmark suite document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub seed: u64,
    pub train_periods: u32,
    pub eval_periods: u32,
    pub coefficients: CoeffRange,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{generate_variant, FormSkeleton, TrendKind};

    #[test]
    fn manifest_round_trip() {
        let sk: FormSkeleton = "(+ (* sin square) saw)".parse().unwrap();
        let v = generate_variant(&sk, Some(TrendKind::Linear), 3, &CoeffRange::default(), 5, 10).unwrap();
        let m = Manifest {
            scenario: "trend".into(),
            seed: 3,
            train_periods: 5,
            eval_periods: 10,
            coefficients: CoeffRange::default(),
            entries: vec![ManifestEntry { id: 0, form_id: 0, skeleton: sk.to_string(), variant: v }],
        };
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        let back = Manifest::read(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(again, buf);
    }
}
