use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use parking_lot::Mutex;

use crate::error::{Error, Result};

/// Context-fit score of a word placed in a slot; higher is more coherent.
pub trait CoherencyScorer: Send + Sync {
    fn score(&self, candidate: &str, left: &[String], right: &[String]) -> Result<f64>;

    /// Corpus frequency used as a ranking tie-breaker. Scorers without
    /// counts report 0.
    fn frequency(&self, _word: &str) -> u64 {
        0
    }
}

/// Delegates scoring to a long-running external program.
///
/// One request per line on the child's stdin,
/// `candidate<TAB>left tokens<TAB>right tokens`, answered by one decimal
/// score per line on its stdout.
pub struct ProcessScorer {
    io: Mutex<(ChildStdin, BufReader<ChildStdout>)>,
    child: Mutex<Child>,
}

impl ProcessScorer {
    pub fn spawn(program: &str, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ProcessScorer {
            io: Mutex::new((stdin, stdout)),
            child: Mutex::new(child),
        })
    }
}

impl CoherencyScorer for ProcessScorer {
    fn score(&self, candidate: &str, left: &[String], right: &[String]) -> Result<f64> {
        let mut io = self.io.lock();
        let (stdin, stdout) = &mut *io;
        let request = format!("{candidate}\t{}\t{}\n", left.join(" "), right.join(" "));
        stdin
            .write_all(request.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::Scorer(format!("write failed: {e}")))?;
        let mut line = String::new();
        let n = stdout
            .read_line(&mut line)
            .map_err(|e| Error::Scorer(format!("read failed: {e}")))?;
        if n == 0 {
            return Err(Error::Scorer("scorer process closed its output".into()));
        }
        let value: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::Scorer(format!("not a number: {:?}", line.trim())))?;
        if !value.is_finite() {
            return Err(Error::Scorer(format!("non-finite score {value}")));
        }
        Ok(value)
    }
}

impl Drop for ProcessScorer {
    fn drop(&mut self) {
        let mut child = self.child.lock();
        let _ = child.kill();
        let _ = child.wait();
    }
}
