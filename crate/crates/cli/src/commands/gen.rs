use twolevel_core::bitgen::{write_bits, BitSource, SourceKind};

use crate::args::GenArgs;
use crate::error::{CliError, CliResult};
use crate::output::Output;

pub fn run(a: &GenArgs, out: &Output) -> CliResult<()> {
    if a.source == SourceKind::File {
        return Err(CliError::Usage("gen needs a generator, not file".into()));
    }
    if a.bits == 0 {
        return Err(CliError::Validation("--bits must be positive".into()));
    }
    let mut src = BitSource::experiment(a.source, a.seed)?;
    let bits = src.next_block(a.bits as usize)?;
    let path = out.path(&a.out);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(e.to_string()))?;
    }
    write_bits(&path, &bits, a.format.into())?;
    let d = src.derivation();
    eprintln!("wrote {} bits of {} (seed {}) to {}", a.bits, d.kind.name(), d.seed, path.display());
    Ok(())
}
