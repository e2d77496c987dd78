use planegen_core::benchmark::{
    generate_split, write_manifest, ImageFormat, Split, SplitOptions, TaskKind,
};
use planegen_core::pairs::{generate_pair, generate_style_pair, PairExhausted};
use planegen_core::render::{DiagramImage, DomainTag};
use rayon::prelude::*;

use crate::args::Format;
use crate::config::{GenBenchmarkConfig, GenPairsConfig, GenStylePairsConfig};
use crate::data::{create_dir, write_file, JsonlWriter, PAIRS_FILE, STYLE_PAIRS_FILE};
use crate::error::CliError;

impl From<Format> for ImageFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Pgm => ImageFormat::Pgm,
            Format::Png => ImageFormat::Png,
        }
    }
}

fn budget(index: usize, e: PairExhausted) -> CliError {
    CliError::Budget(format!("pair {index}: {e}"))
}

/// Encodes an image (and optionally its SVG) under `stem` and returns the
/// raster's path relative to the dataset root.
fn write_image(
    root: &std::path::Path,
    stem: &str,
    img: &DiagramImage,
    format: Format,
    svg: bool,
) -> Result<String, CliError> {
    let f = ImageFormat::from(format);
    let rel = format!("{stem}.{}", f.ext());
    write_file(&root.join(&rel), &f.encode(img))?;
    if svg {
        write_file(&root.join(format!("{stem}.svg")), img.svg.as_bytes())?;
    }
    Ok(rel)
}

/// Streams pairs to disk in chunks so memory stays flat for large counts.
pub fn gen_pairs(c: &GenPairsConfig) -> Result<usize, CliError> {
    create_dir(&c.out.join("images"))?;
    let mut w = JsonlWriter::create(&c.out.join(PAIRS_FILE))?;
    for start in (0..c.count).step_by(c.chunk) {
        let end = (start + c.chunk).min(c.count);
        let lines: Vec<_> = (start..end)
            .into_par_iter()
            .map(|i| {
                let p = generate_pair(c.seed, i).map_err(|e| budget(i, e))?;
                let rel = write_image(&c.out, &format!("images/{i}"), &p.image, c.format, c.svg)?;
                Ok(p.line(i, rel))
            })
            .collect::<Result<_, CliError>>()?;
        for l in &lines {
            w.push(l)?;
        }
    }
    w.finish()?;
    Ok(c.count)
}

pub fn gen_style_pairs(c: &GenStylePairsConfig) -> Result<usize, CliError> {
    let domains: Vec<DomainTag> = c
        .domains
        .iter()
        .map(|d| {
            DomainTag::from_name(d).ok_or_else(|| CliError::Usage(format!("unknown domain {d:?}")))
        })
        .collect::<Result<_, _>>()?;
    if domains.is_empty() {
        return Err(CliError::Usage("no target domains".into()));
    }
    for d in &domains {
        create_dir(&c.out.join("images").join(d.name()))?;
    }
    let lines: Vec<_> = (0..c.count)
        .into_par_iter()
        .map(|i| {
            let d = domains[i % domains.len()];
            let p = generate_style_pair(d, c.seed, i).map_err(|e| budget(i, e))?;
            let stem = format!("images/{}/{i}", d.name());
            let t = write_image(
                &c.out,
                &format!("{stem}_target"),
                &p.target,
                c.format,
                c.svg,
            )?;
            let s = write_image(
                &c.out,
                &format!("{stem}_source"),
                &p.source,
                c.format,
                c.svg,
            )?;
            Ok(p.line(i, t, s))
        })
        .collect::<Result<_, CliError>>()?;
    let mut w = JsonlWriter::create(&c.out.join(STYLE_PAIRS_FILE))?;
    for l in &lines {
        w.push(l)?;
    }
    w.finish()?;
    Ok(c.count)
}

/// Returns the number of manifest lines written.
pub fn gen_benchmark(c: &GenBenchmarkConfig) -> Result<usize, CliError> {
    create_dir(&c.out)?;
    let opts = SplitOptions {
        out_dir: (!c.manifest_only).then(|| c.out.clone()),
        format: c.format.into(),
        write_svg: c.svg,
        chunk: c.chunk,
    };
    let mut total = 0;
    for name in &c.tasks {
        let task = TaskKind::from_name(name)
            .ok_or_else(|| CliError::Usage(format!("unknown task {name:?}")))?;
        for (split, &count) in Split::ALL.iter().zip(&c.counts) {
            let m = generate_split(task, *split, count, c.seed, &opts)?;
            write_manifest(&c.out, &m)?;
            total += m.examples.len();
            eprintln!(
                "{} {}: {} examples, classes {:?}",
                task.name(),
                split.name(),
                count,
                m.class_counts()
            );
        }
    }
    Ok(total)
}
