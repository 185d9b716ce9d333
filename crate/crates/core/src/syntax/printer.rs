use super::{Formula, Notation, Term};

/// Parenthesization policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parens {
    /// Only where precedence or associativity requires them; quantifier
    /// bodies are always wrapped.
    #[default]
    Minimal,
    /// Every binary subformula is wrapped, including the root.
    Full,
}

/// Canonical rendering with minimal parentheses.
pub fn print(f: &Formula, notation: Notation) -> String {
    print_with(f, notation, Parens::Minimal)
}

pub fn print_with(f: &Formula, notation: Notation, parens: Parens) -> String {
    let mut out = String::new();
    let p = Printer {
        ascii: notation == Notation::Ascii,
        full: parens == Parens::Full,
    };
    p.formula(f, &mut out);
    out
}

struct Printer {
    ascii: bool,
    full: bool,
}

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) | Formula::Iff(..) => 1,
        Formula::Or(..) | Formula::Xor(..) => 2,
        Formula::And(..) => 3,
        _ => 4,
    }
}

impl Printer {
    fn sym(&self, unicode: &'static str, ascii: &'static str) -> &'static str {
        if self.ascii {
            ascii
        } else {
            unicode
        }
    }

    fn formula(&self, f: &Formula, out: &mut String) {
        match f {
            Formula::ForAll(v, body) | Formula::Exists(v, body) => {
                let q = match f {
                    Formula::ForAll(..) => self.sym("∀", "forall "),
                    _ => self.sym("∃", "exists "),
                };
                out.push_str(q);
                out.push_str(v);
                out.push(' ');
                if matches!(**body, Formula::ForAll(..) | Formula::Exists(..)) {
                    self.formula(body, out);
                } else {
                    out.push('(');
                    self.formula_bare(body, out);
                    out.push(')');
                }
            }
            Formula::Not(body) => {
                out.push_str(self.sym("¬", "~"));
                self.child(body, level(body) < 4, out);
            }
            Formula::And(l, r) => self.binary(f, l, r, self.sym("∧", "&"), out),
            Formula::Or(l, r) => self.binary(f, l, r, self.sym("∨", "|"), out),
            Formula::Xor(l, r) => self.binary(f, l, r, self.sym("⊕", "xor"), out),
            Formula::Implies(l, r) => self.binary(f, l, r, self.sym("→", "->"), out),
            Formula::Iff(l, r) => self.binary(f, l, r, self.sym("↔", "<->"), out),
            Formula::Equals(a, b) => {
                term(a, out);
                out.push_str(" = ");
                term(b, out);
            }
            Formula::Atom(name, args) => {
                out.push_str(name);
                if !args.is_empty() {
                    term_args(args, out);
                }
            }
        }
    }

    /// A formula that already sits inside parentheses.
    fn formula_bare(&self, f: &Formula, out: &mut String) {
        match f {
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Xor(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r)
                if self.full =>
            {
                let op = self.op_symbol(f);
                self.binary_inner(f, l, r, op, out)
            }
            _ => self.formula(f, out),
        }
    }

    fn op_symbol(&self, f: &Formula) -> &'static str {
        match f {
            Formula::And(..) => self.sym("∧", "&"),
            Formula::Or(..) => self.sym("∨", "|"),
            Formula::Xor(..) => self.sym("⊕", "xor"),
            Formula::Implies(..) => self.sym("→", "->"),
            _ => self.sym("↔", "<->"),
        }
    }

    fn binary(&self, f: &Formula, l: &Formula, r: &Formula, op: &str, out: &mut String) {
        if self.full {
            out.push('(');
            self.binary_inner(f, l, r, op, out);
            out.push(')');
        } else {
            self.binary_inner(f, l, r, op, out);
        }
    }

    fn binary_inner(&self, f: &Formula, l: &Formula, r: &Formula, op: &str, out: &mut String) {
        let lv = level(f);
        // levels 2 and 3 are left-associative, level 1 right-associative
        let (wrap_l, wrap_r) = if lv == 1 {
            (level(l) <= lv, level(r) < lv)
        } else {
            (level(l) < lv, level(r) <= lv)
        };
        self.child(l, wrap_l && !self.full, out);
        out.push(' ');
        out.push_str(op);
        out.push(' ');
        self.child(r, wrap_r && !self.full, out);
    }

    fn child(&self, f: &Formula, wrap: bool, out: &mut String) {
        if wrap {
            out.push('(');
            self.formula(f, out);
            out.push(')');
        } else {
            self.formula(f, out);
        }
    }
}

fn term(t: &Term, out: &mut String) {
    match t {
        Term::Var(n) | Term::Const(n) => out.push_str(n),
        Term::Func(n, args) => {
            out.push_str(n);
            term_args(args, out);
        }
    }
}

fn term_args(args: &[Term], out: &mut String) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        term(a, out);
    }
    out.push(')');
}
