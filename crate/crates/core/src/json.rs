//! Wire formats: matrix JSON ({"re": [[..]], "im": [[..]]}), channel-set
//! files, code files, and the optional "numerics" tolerance section.

use crate::channel::{validate_channel, AveragedChannelSpec, CompoundSet, CqChannel};
use crate::coding::Codebook;
use crate::error::{CqError, Result};
use crate::linalg::CMat;
use crate::operator::{DensityOperator, HermitianOperator, Numerics};
use crate::prob::ProbabilityVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let (rows, cols) = (m.nrows(), m.ncols());
        let mut re = vec![vec![0.0; cols]; rows];
        let mut im = vec![vec![0.0; cols]; rows];
        for i in 0..rows {
            for j in 0..cols {
                re[i][j] = m[(i, j)].re;
                im[i][j] = m[(i, j)].im;
            }
        }
        MatrixJson { re, im }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let rows = self.re.len();
        if rows == 0 || self.im.len() != rows {
            return Err(CqError::InvalidParameter(
                "matrix JSON: re/im row counts differ or are empty".into(),
            ));
        }
        let cols = self.re[0].len();
        for (part, name) in [(&self.re, "re"), (&self.im, "im")] {
            for (i, row) in part.iter().enumerate() {
                if row.len() != cols {
                    return Err(CqError::InvalidParameter(format!(
                        "matrix JSON: {name} row {i} has {} entries, expected {cols}",
                        row.len()
                    )));
                }
            }
        }
        Ok(CMat::from_fn(rows, cols, |i, j| {
            Complex64::new(self.re[i][j], self.im[i][j])
        }))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelJson {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    pub states: Vec<MatrixJson>,
}

/// Channel-set file: weights present on every channel make it an averaged
/// spec, absent everywhere a compound set; mixing the two is an error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSetFile {
    pub dim: usize,
    pub alphabet: Vec<String>,
    pub channels: Vec<ChannelJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numerics: Option<Numerics>,
}

#[derive(Debug, Clone)]
pub enum ParsedChannels {
    Compound(CompoundSet),
    Averaged(AveragedChannelSpec),
}

impl ParsedChannels {
    pub fn compound(&self) -> &CompoundSet {
        match self {
            ParsedChannels::Compound(set) => set,
            ParsedChannels::Averaged(spec) => spec.compound(),
        }
    }
}

pub fn parse_channel_set(file: &ChannelSetFile) -> Result<ParsedChannels> {
    if file.channels.is_empty() {
        return Err(CqError::InvalidParameter("no channels in file".into()));
    }
    let numerics = file.numerics.clone().unwrap_or_default();
    let mut ids = Vec::new();
    let mut members = Vec::new();
    let mut weights = Vec::new();
    let weighted = file.channels[0].weight.is_some();
    for ch in &file.channels {
        if ch.weight.is_some() != weighted {
            return Err(CqError::InvalidParameter(
                "either all channels carry weights or none do".into(),
            ));
        }
        if ch.states.len() != file.alphabet.len() {
            return Err(CqError::LabelMismatch(format!(
                "channel {:?} has {} states for {} symbols",
                ch.id,
                ch.states.len(),
                file.alphabet.len()
            )));
        }
        let outputs: Vec<DensityOperator> = ch
            .states
            .iter()
            .map(|m| {
                let mat = m.to_matrix()?;
                if mat.nrows() != file.dim {
                    return Err(CqError::DimensionMismatch(format!(
                        "channel {:?}: state is {}x{}, expected dim {}",
                        ch.id,
                        mat.nrows(),
                        mat.ncols(),
                        file.dim
                    )));
                }
                DensityOperator::new_with(
                    HermitianOperator::new_with(mat, &numerics)?,
                    &numerics,
                )
            })
            .collect::<Result<_>>()?;
        let channel = CqChannel::new(file.alphabet.clone(), outputs)?;
        validate_channel(&channel, &numerics)?;
        ids.push(ch.id.clone());
        members.push(channel);
        if let Some(w) = ch.weight {
            weights.push(w);
        }
    }
    let set = CompoundSet::new(ids.clone(), members)?;
    if weighted {
        let prob = ProbabilityVector::new(ids, weights)?;
        Ok(ParsedChannels::Averaged(AveragedChannelSpec::new(
            set, prob,
        )?))
    } else {
        Ok(ParsedChannels::Compound(set))
    }
}

pub fn channel_set_to_file(set: &CompoundSet, weights: Option<&ProbabilityVector>) -> ChannelSetFile {
    let channels = set
        .iter()
        .map(|(id, w)| ChannelJson {
            id: id.clone(),
            weight: weights.and_then(|mu| mu.weight_of(id)),
            states: w
                .outputs()
                .iter()
                .map(|rho| MatrixJson::from_matrix(rho.mat()))
                .collect(),
        })
        .collect();
    ChannelSetFile {
        dim: set.dim(),
        alphabet: set.alphabet().to_vec(),
        channels,
        numerics: None,
    }
}

// ---------------------------------------------------------------------------
// Code files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeFile {
    pub n: usize,
    pub alphabet: Vec<String>,
    /// Codewords as symbol sequences.
    pub codewords: Vec<Vec<String>>,
    pub decoders: Vec<MatrixJson>,
}

pub fn code_to_file(code: &Codebook) -> CodeFile {
    CodeFile {
        n: code.n,
        alphabet: code.alphabet.clone(),
        codewords: code
            .codewords
            .iter()
            .map(|w| w.iter().map(|&x| code.alphabet[x].clone()).collect())
            .collect(),
        decoders: code
            .decoders
            .iter()
            .map(|b| MatrixJson::from_matrix(b.mat()))
            .collect(),
    }
}

pub fn code_from_file(file: &CodeFile) -> Result<Codebook> {
    let codewords: Vec<Vec<usize>> = file
        .codewords
        .iter()
        .map(|w| {
            w.iter()
                .map(|s| {
                    file.alphabet
                        .iter()
                        .position(|a| a == s)
                        .ok_or_else(|| CqError::UnknownSymbol(s.clone()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let decoders: Vec<HermitianOperator> = file
        .decoders
        .iter()
        .map(|m| HermitianOperator::new(m.to_matrix()?))
        .collect::<Result<_>>()?;
    Codebook::new(file.n, file.alphabet.clone(), codewords, decoders)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    #[test]
    fn matrix_roundtrip() {
        let mut rng = random::stream(808, 0);
        let rho = random::random_density(3, &mut rng);
        let json = MatrixJson::from_matrix(rho.mat());
        let back = json.to_matrix().unwrap();
        assert!(crate::linalg::max_abs_diff(rho.mat(), &back) < 1e-15);
    }

    #[test]
    fn channel_set_roundtrip_compound_and_averaged() {
        let mut rng = random::stream(808, 1);
        let labels: Vec<String> = vec!["0".into(), "1".into()];
        let members: Vec<CqChannel> = (0..2)
            .map(|_| {
                CqChannel::new(
                    labels.clone(),
                    vec![
                        random::random_density(2, &mut rng),
                        random::random_density(2, &mut rng),
                    ],
                )
                .unwrap()
            })
            .collect();
        let set = CompoundSet::new(vec!["a".into(), "b".into()], members).unwrap();

        let file = channel_set_to_file(&set, None);
        let text = serde_json::to_string(&file).unwrap();
        let parsed: ChannelSetFile = serde_json::from_str(&text).unwrap();
        match parse_channel_set(&parsed).unwrap() {
            ParsedChannels::Compound(got) => {
                assert_eq!(got.ids(), set.ids());
                for (x, y) in got.members().iter().zip(set.members()) {
                    assert!(crate::channel::channel_distance(x, y).unwrap() < 1e-12);
                }
            }
            _ => panic!("expected compound"),
        }

        let weights =
            ProbabilityVector::new(vec!["a".into(), "b".into()], vec![0.25, 0.75]).unwrap();
        let file = channel_set_to_file(&set, Some(&weights));
        match parse_channel_set(&file).unwrap() {
            ParsedChannels::Averaged(spec) => {
                assert_eq!(spec.weights().weights(), weights.weights());
            }
            _ => panic!("expected averaged"),
        }
    }

    #[test]
    fn channel_set_rejects_mixed_weights() {
        let labels: Vec<String> = vec!["0".into()];
        let rho = MatrixJson::from_matrix(DensityOperator::maximally_mixed(2).mat());
        let file = ChannelSetFile {
            dim: 2,
            alphabet: labels,
            channels: vec![
                ChannelJson {
                    id: "a".into(),
                    weight: Some(0.5),
                    states: vec![rho.clone()],
                },
                ChannelJson {
                    id: "b".into(),
                    weight: None,
                    states: vec![rho],
                },
            ],
            numerics: None,
        };
        assert!(parse_channel_set(&file).is_err());
    }

    #[test]
    fn numerics_section_loosens_validation() {
        // A slightly non-normalized state passes only with a loose trace_tol.
        let mut mat = DensityOperator::maximally_mixed(2).mat().clone();
        mat[(0, 0)] += Complex64::new(5e-7, 0.0);
        let file = ChannelSetFile {
            dim: 2,
            alphabet: vec!["0".into()],
            channels: vec![ChannelJson {
                id: "a".into(),
                weight: None,
                states: vec![MatrixJson::from_matrix(&mat)],
            }],
            numerics: None,
        };
        assert!(parse_channel_set(&file).is_err());
        let mut loose = file.clone();
        loose.numerics = Some(Numerics {
            trace_tol: 1e-5,
            ..Numerics::default()
        });
        assert!(parse_channel_set(&loose).is_ok());
    }

    #[test]
    fn code_file_roundtrip() {
        let code = Codebook::new(
            2,
            vec!["0".into(), "1".into()],
            vec![vec![0, 1], vec![1, 0]],
            vec![
                HermitianOperator::from_real_diagonal(&[0.5, 0.0, 0.0, 0.0]),
                HermitianOperator::from_real_diagonal(&[0.0, 0.5, 0.0, 0.0]),
            ],
        )
        .unwrap();
        let file = code_to_file(&code);
        let text = serde_json::to_string_pretty(&file).unwrap();
        let parsed: CodeFile = serde_json::from_str(&text).unwrap();
        let back = code_from_file(&parsed).unwrap();
        assert_eq!(back.codewords, code.codewords);
        assert_eq!(back.n, code.n);
    }
}
