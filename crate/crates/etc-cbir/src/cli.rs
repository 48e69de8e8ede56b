//! `etc-cbir` command line.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use etc_cbir_core::codebook::build_codebook;
use etc_cbir_core::{
    decrypt, encrypt, esimple, DescriptorParams, IndexEntry, KMeansConfig, RetrievalIndex,
};

use crate::experiment::{image_files, load_images, run_experiment, ExperimentConfig};
use crate::manifest::Manifest;
use crate::service::{self, ServiceConfig};
use crate::{codebook_file, image_io, index_file, keyfile};

#[derive(Debug, Parser)]
#[command(
    name = "etc-cbir",
    version,
    about = "Privacy-preserving image retrieval over EtC-encrypted images"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a key file (three 64-bit seeds).
    Keygen {
        /// Derive the keys from this seed instead of OS entropy.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Encrypt a PNG into an EtC image (cropped to a multiple of 16).
    Encrypt(CipherArgs),
    /// Decrypt an EtC image with its owner's key file.
    Decrypt(CipherArgs),
    /// Codebook operations.
    #[command(subcommand)]
    Codebook(CodebookCmd),
    /// Index operations.
    #[command(subcommand)]
    Index(IndexCmd),
    /// Rank indexed images against a query image; prints `rank\tid\tdistance`.
    Query {
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
        image: PathBuf,
    },
    /// Evaluation.
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Run the third-party HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct CipherArgs {
    #[arg(short, long)]
    key: PathBuf,
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Subcommand)]
enum CodebookCmd {
    /// Train a codebook with k-means on a directory of plain images.
    Build {
        /// Directory of training images (png/jpg).
        #[arg(long)]
        train: PathBuf,
        /// Number of visual words.
        #[arg(short = 'm', long, default_value_t = 256)]
        words: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Dataset label stored in the header; defaults to the directory name.
        #[arg(long)]
        label: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum IndexCmd {
    /// Index encrypted images; ids are file stems.
    Build {
        #[arg(long)]
        codebook: PathBuf,
        /// Owner information stored with every entry.
        #[arg(long, default_value = "")]
        owner_info: String,
        #[arg(short, long)]
        output: PathBuf,
        /// Image files or directories.
        #[arg(required = true)]
        images: Vec<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum EvalCmd {
    /// mAP over a `path,group_id` manifest.
    Map {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory of independent plain images for the codebook.
        #[arg(long)]
        codebook_source: PathBuf,
        #[arg(short = 'm', long, default_value_t = 256)]
        words: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        /// Encrypt stored images and queries with keys derived from this seed.
        #[arg(long)]
        encrypt_seed: Option<u64>,
        /// Write the JSON report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    listen: Option<SocketAddr>,
    #[arg(long)]
    codebook: Option<PathBuf>,
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    storage: Option<PathBuf>,
    #[arg(long)]
    top_k: Option<usize>,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Keygen { seed, output } => {
            keyfile::save(&output, &keyfile::generate(seed))?;
        }
        Command::Encrypt(a) => {
            let keys = keyfile::load(&a.key)?;
            let img = image_io::load(&a.input)?;
            let aligned = img.crop_to_block_multiple()?;
            if aligned.width() != img.width() || aligned.height() != img.height() {
                eprintln!(
                    "note: cropped {}x{} to {}x{}",
                    img.width(),
                    img.height(),
                    aligned.width(),
                    aligned.height()
                );
            }
            image_io::save_png(&a.output, &encrypt(&aligned, keys)?)?;
        }
        Command::Decrypt(a) => {
            let keys = keyfile::load(&a.key)?;
            let img = image_io::load(&a.input)?;
            image_io::save_png(&a.output, &decrypt(&img, keys)?)?;
        }
        Command::Codebook(CodebookCmd::Build {
            train,
            words,
            seed,
            max_iters,
            tol,
            label,
            output,
        }) => {
            let files = image_files(&train)?;
            if files.is_empty() {
                bail!("no png/jpg images in {}", train.display());
            }
            let images = load_images(&files)?;
            let label = label.unwrap_or_else(|| {
                train
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default()
            });
            let cfg = KMeansConfig {
                clusters: words,
                seed,
                max_iters,
                tol,
            };
            let (cb, km) = build_codebook(&images, &DescriptorParams::default(), &cfg, &label)?;
            let cb = codebook_file::save(&output, cb)?;
            eprintln!(
                "{} words from {} images, {} iterations, inertia {:.6}, id {}",
                cb.len(),
                images.len(),
                km.iterations,
                km.inertia(),
                cb.id
            );
        }
        Command::Index(IndexCmd::Build {
            codebook,
            owner_info,
            output,
            images,
        }) => {
            let cb = codebook_file::load(&codebook)?;
            let mut files = Vec::new();
            for p in images {
                if p.is_dir() {
                    files.extend(image_files(&p)?);
                } else {
                    files.push(p);
                }
            }
            let mut index = RetrievalIndex::new(cb.len(), cb.id);
            for f in &files {
                let id = f
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .with_context(|| format!("no file name in {}", f.display()))?;
                let img = image_io::load(f)?.crop_to_block_multiple()?;
                index.add(IndexEntry {
                    image_id: id,
                    vector: esimple(&img, &cb)?,
                    owner_info: owner_info.clone(),
                    stored_path: f.to_string_lossy().into_owned(),
                })?;
            }
            index_file::save(&output, &index)?;
            eprintln!("indexed {} images", index.len());
        }
        Command::Query {
            codebook,
            index,
            top,
            image,
        } => {
            if top == 0 {
                bail!("--top must be at least 1");
            }
            let cb = codebook_file::load(&codebook)?;
            let ix = index_file::load(&index)?;
            let q = esimple(&image_io::load(&image)?.crop_to_block_multiple()?, &cb)?;
            let mut out = std::io::stdout().lock();
            for r in ix.query(&q, top)? {
                writeln!(out, "{}\t{}\t{}", r.rank, r.image_id, r.distance)?;
            }
        }
        Command::Eval(EvalCmd::Map {
            manifest,
            codebook_source,
            words,
            seed,
            max_iters,
            encrypt_seed,
            output,
        }) => {
            let m = Manifest::load(&manifest)?;
            let mut cfg =
                ExperimentConfig::new(words, seed, codebook_source.to_string_lossy().into_owned());
            cfg.max_iters = max_iters;
            let outcome = run_experiment(&m, &codebook_source, &cfg, encrypt_seed)?;
            let json = serde_json::to_string_pretty(&outcome.report)?;
            match output {
                Some(p) => {
                    write_text(&p, &json)?;
                    println!(
                        "mAP {:.4} over {} queries",
                        outcome.report.map,
                        outcome.report.per_query.len()
                    );
                }
                None => println!("{json}"),
            }
        }
        Command::Serve(a) => {
            let mut cfg = service::config_from_env(ServiceConfig::default())?;
            if let Some(v) = a.listen {
                cfg.listen = v;
            }
            if let Some(v) = a.codebook {
                cfg.codebook = v;
            }
            if let Some(v) = a.index {
                cfg.index = v;
            }
            if let Some(v) = a.storage {
                cfg.storage = v;
            }
            if let Some(v) = a.top_k {
                cfg.top_k = v;
            }
            tokio::runtime::Runtime::new()?.block_on(service::serve(cfg))?;
        }
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
