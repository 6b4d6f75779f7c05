use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use amr_incoherence::dialogue::{Conversation, CorpusError, CorpusReader};
use rayon::prelude::*;

use crate::Failure;

/// Conversations handed to the thread pool at a time.
const CHUNK: usize = 512;

/// Opens `path` for reading; `-` is stdin.
pub fn open(path: &Path) -> Result<Box<dyn BufRead>, Failure> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin().lock())));
    }
    let file = File::open(path).map_err(|e| Failure::usage(format!("cannot open {}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(file)))
}

/// Creates `path` for writing; `-` or no path is stdout.
pub fn create(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) if p == Path::new("-") => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            let file = File::create(p).map_err(|e| Failure::usage(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

pub fn corpus_failure(path: &Path, e: CorpusError) -> Failure {
    match e {
        CorpusError::Io(e) => Failure::usage(format!("cannot read {}: {e}", path.display())),
        e => Failure::data(format!("{}: {e}", path.display())),
    }
}

pub fn read_all(path: &Path) -> Result<Vec<Conversation>, Failure> {
    CorpusReader::new(open(path)?).collect::<Result<_, _>>().map_err(|e| corpus_failure(path, e))
}

pub fn pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Failure::usage(e.to_string()))
}

/// Maps `f` over `items` in chunks on `pool`, handing results to `sink` in
/// input order.
pub fn ordered_map<I, T, F, S>(pool: &rayon::ThreadPool, items: I, f: F, mut sink: S) -> Result<(), Failure>
where
    I: Iterator<Item = Result<Conversation, Failure>>,
    T: Send,
    F: Fn(&Conversation) -> Result<T, Failure> + Sync,
    S: FnMut(T) -> Result<(), Failure>,
{
    let mut items = items.peekable();
    while items.peek().is_some() {
        let chunk = items.by_ref().take(CHUNK).collect::<Result<Vec<_>, _>>()?;
        let results: Vec<Result<T, Failure>> = pool.install(|| chunk.par_iter().map(&f).collect());
        for r in results {
            sink(r?)?;
        }
    }
    Ok(())
}

pub fn write_failure(e: io::Error) -> Failure {
    Failure::usage(format!("write failed: {e}"))
}
