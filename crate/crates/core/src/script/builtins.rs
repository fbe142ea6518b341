//! The complete builtin table. Nothing outside this table is callable from SimScript.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinClass {
    /// Draws from the seeded generator.
    Random,
    /// Writes to the run result. These are the only output channels.
    Output,
    /// Pure numeric helper.
    Pure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Builtin {
    pub name: &'static str,
    pub arity: usize,
    pub class: BuiltinClass,
}

const fn b(name: &'static str, arity: usize, class: BuiltinClass) -> Builtin {
    Builtin { name, arity, class }
}

pub const BUILTINS: &[Builtin] = &[
    b("rand_uniform", 2, BuiltinClass::Random),
    b("rand_uniform_int", 2, BuiltinClass::Random),
    b("rand_exp", 1, BuiltinClass::Random),
    b("record", 3, BuiltinClass::Output),
    b("mark_event", 2, BuiltinClass::Output),
    b("plot_decl", 4, BuiltinClass::Output),
    b("min", 2, BuiltinClass::Pure),
    b("max", 2, BuiltinClass::Pure),
    b("floor", 1, BuiltinClass::Pure),
    b("ceil", 1, BuiltinClass::Pure),
    b("abs", 1, BuiltinClass::Pure),
    b("len", 1, BuiltinClass::Pure),
];

pub fn lookup(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}
