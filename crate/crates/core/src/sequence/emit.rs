use std::fmt::Write;

use super::ir::*;

/// Canonical text for an IR. Parsing the output gives back an equal IR.
pub fn emit(ir: &SequenceIR) -> String {
    let mut out = String::new();
    for s in &ir.sweeps {
        let _ = writeln!(out, "sweep {} from {} to {} steps {}", s.name, s.from, s.to, s.steps);
    }
    nodes(&mut out, &ir.nodes, 0);
    out
}

fn nodes(out: &mut String, ns: &[Node], depth: usize) {
    for n in ns {
        out.push_str(&"  ".repeat(depth));
        match n {
            Node::Pulse(p) => {
                let _ = write!(out, "{} {}", p.channel, p.angle);
                if let Some(ph) = &p.phase {
                    let _ = write!(out, " phase={ph}");
                }
                if let Some(r) = &p.rabi {
                    let _ = write!(out, " rabi={r}");
                }
                if let Some(pw) = p.power {
                    let _ = write!(out, " power={pw}");
                }
                if let Some(at) = p.at {
                    let _ = write!(out, " @{at}");
                }
                out.push('\n');
            }
            Node::Repeat { count, body, .. } => {
                let _ = writeln!(out, "repeat {count} {{");
                nodes(out, body, depth + 1);
                out.push_str(&"  ".repeat(depth));
                out.push_str("}\n");
            }
        }
    }
}
