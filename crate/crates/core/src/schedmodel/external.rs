//! Line-delimited JSON protocol for mechanisms running as child processes.
//!
//! The engine writes one instance JSON per line to the child's stdin and reads one
//! allocation JSON per line from its stdout.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use super::{Allocation, Instance, Mechanism, MechanismError};

/// Environment variable bounding each query, in milliseconds.
pub const TIMEOUT_ENV: &str = "MECHDOCK_TIMEOUT_MS";

const DEFAULT_TIMEOUT_MS: u64 = 10_000;

/// A mechanism served by a child process speaking the line protocol.
pub struct ExternalMechanism {
    command: String,
    timeout_ms: u64,
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl ExternalMechanism {
    /// Spawns `command` through `sh -c`.
    pub fn spawn(command: &str) -> Result<Self, MechanismError> {
        let timeout_ms = std::env::var(TIMEOUT_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_TIMEOUT_MS);
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| MechanismError::Launch(format!("{command}: {e}")))?;
        let stdin = child.stdin.take().ok_or_else(|| MechanismError::Launch("no stdin pipe".into()))?;
        let stdout = child.stdout.take().ok_or_else(|| MechanismError::Launch("no stdout pipe".into()))?;
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(ExternalMechanism { command: command.to_string(), timeout_ms, child, stdin, lines: rx })
    }

    pub fn command(&self) -> &str {
        &self.command
    }
}

impl Mechanism for ExternalMechanism {
    fn allocate(&mut self, t: &Instance) -> Result<Allocation, MechanismError> {
        let mut line = t.to_json();
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| MechanismError::Protocol(format!("write failed: {e}")))?;
        let reply = match self.lines.recv_timeout(Duration::from_millis(self.timeout_ms)) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => return Err(MechanismError::Protocol(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                let _ = self.child.kill();
                return Err(MechanismError::Timeout(self.timeout_ms));
            }
            Err(RecvTimeoutError::Disconnected) => return Err(MechanismError::Protocol("mechanism closed its output".into())),
        };
        let x: Allocation = serde_json::from_str(reply.trim())
            .map_err(|e| MechanismError::Protocol(format!("unparseable reply {reply:?}: {e}")))?;
        if x.owner.len() != t.m() {
            return Err(MechanismError::Protocol(format!("reply covers {} jobs, expected {}", x.owner.len(), t.m())));
        }
        Ok(x)
    }

    fn describe(&self) -> String {
        format!("extern:{}", self.command)
    }

    fn try_clone(&self) -> Result<Box<dyn Mechanism>, MechanismError> {
        Ok(Box::new(ExternalMechanism::spawn(&self.command)?))
    }
}

impl Drop for ExternalMechanism {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
