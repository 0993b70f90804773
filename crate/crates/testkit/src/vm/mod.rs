//! `testvm`: a small interpreter for the JVM subset the repair fixtures use.
//!
//! Program classes run from their bytecode. A slice of the Java library (strings,
//! builders, boxes, `Random`, a few collections, throwables) is modelled natively;
//! reaching anything else is a [`Thrown::Fault`], which the runner reports as ERROR.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;
use std::sync::Arc;

use bytefix_core::classfile::descriptor::{FieldType, MethodDescriptor};
use bytefix_core::classfile::{ACC_ABSTRACT, ACC_PRIVATE};
use bytefix_core::codemodel::opcodes::{self, Kind};
use bytefix_core::codemodel::{decode_code, CodeBody, ConstValue, Label, Operand};
use bytefix_core::hierarchy::ClassHierarchy;
use bytefix_core::project::{ClassSet, LoadedClass};

mod native;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i32),
    Long(i64),
    Float(f32),
    Double(f64),
    Null,
    Ref(usize),
    /// Second slot of a long or double, and unset locals.
    Top,
}

impl Value {
    pub fn wide(self) -> bool {
        matches!(self, Value::Long(_) | Value::Double(_))
    }

    pub fn default_for(desc: &str) -> Value {
        match desc.as_bytes().first() {
            Some(b'J') => Value::Long(0),
            Some(b'F') => Value::Float(0.0),
            Some(b'D') => Value::Double(0.0),
            Some(b'L' | b'[') => Value::Null,
            _ => Value::Int(0),
        }
    }
}

#[derive(Debug)]
pub enum Thrown {
    /// A Java exception object in flight.
    Exception(usize),
    /// Something the interpreter does not model, or a type confusion.
    Fault(String),
    StepLimit,
}

pub(crate) fn fault<T>(msg: impl Into<String>) -> Result<T, Thrown> {
    Err(Thrown::Fault(msg.into()))
}

#[derive(Debug, Clone)]
pub enum Obj {
    Instance { class: String, fields: HashMap<String, Value> },
    Array { class: String, items: Vec<Value> },
    Str(String),
    Builder(String),
    Random { class: String, seed: i64 },
    Boxed { class: String, value: Value },
    List { class: String, items: Vec<Value> },
    Map { class: String, entries: Vec<(Value, Value)> },
    Iter { items: Vec<Value>, pos: usize },
    ClassObj(String),
}

struct Method {
    owner: String,
    name: String,
    descriptor: String,
    class: Arc<LoadedClass>,
    body: CodeBody,
    positions: HashMap<Label, usize>,
    /// `(start, end, handler, catch type)` as instruction positions; end is exclusive.
    handlers: Vec<(usize, usize, usize, Option<String>)>,
}

enum Step {
    Next,
    Jump(Label),
    Return(Option<Value>),
}

const MAX_DEPTH: usize = 400;

pub struct Vm {
    classes: ClassSet,
    hierarchy: ClassHierarchy,
    methods: HashMap<(String, String, String), Option<Rc<Method>>>,
    pub(crate) heap: Vec<Obj>,
    statics: HashMap<(String, String), Value>,
    initialized: HashSet<String>,
    strings: HashMap<String, usize>,
    steps: u64,
    pub step_limit: u64,
    depth: usize,
    traced: HashSet<String>,
    /// `(class, method, descriptor, pc)` executed in traced classes.
    pub coverage: BTreeSet<(String, String, String, u32)>,
}

impl Vm {
    pub fn new(classes: ClassSet, traced: HashSet<String>) -> Vm {
        let hierarchy = classes.hierarchy();
        Vm {
            classes,
            hierarchy,
            methods: HashMap::new(),
            heap: Vec::new(),
            statics: HashMap::new(),
            initialized: HashSet::new(),
            strings: HashMap::new(),
            steps: 0,
            step_limit: 5_000_000,
            depth: 0,
            traced,
            coverage: BTreeSet::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Runs a static method of a program class.
    pub fn invoke_static(&mut self, class: &str, name: &str, desc: &str, args: Vec<Value>) -> Result<Option<Value>, Thrown> {
        self.ensure_init(class)?;
        let Some(m) = self.resolve(class, name, desc) else {
            return fault(format!("no method {class}.{name}{desc}"));
        };
        self.execute(m, args)
    }

    pub fn is_program_class(&self, name: &str) -> bool {
        self.classes.classes.contains_key(name)
    }

    pub(crate) fn alloc(&mut self, o: Obj) -> Value {
        self.heap.push(o);
        Value::Ref(self.heap.len() - 1)
    }

    pub(crate) fn intern(&mut self, s: &str) -> Value {
        if let Some(&r) = self.strings.get(s) {
            return Value::Ref(r);
        }
        let v = self.alloc(Obj::Str(s.to_string()));
        if let Value::Ref(r) = v {
            self.strings.insert(s.to_string(), r);
        }
        v
    }

    pub(crate) fn new_string(&mut self, s: String) -> Value {
        self.alloc(Obj::Str(s))
    }

    pub(crate) fn str_of(&self, v: Value) -> Result<Option<&str>, Thrown> {
        match v {
            Value::Null => Ok(None),
            Value::Ref(r) => match &self.heap[r] {
                Obj::Str(s) => Ok(Some(s)),
                o => fault(format!("expected a string, got {}", self.obj_class(o))),
            },
            v => fault(format!("expected a string, got {v:?}")),
        }
    }

    pub(crate) fn obj_class(&self, o: &Obj) -> String {
        match o {
            Obj::Instance { class, .. }
            | Obj::Array { class, .. }
            | Obj::Random { class, .. }
            | Obj::Boxed { class, .. }
            | Obj::List { class, .. }
            | Obj::Map { class, .. } => class.clone(),
            Obj::Str(_) => "java/lang/String".into(),
            Obj::Builder(_) => "java/lang/StringBuilder".into(),
            Obj::Iter { .. } => "java/util/Iterator".into(),
            Obj::ClassObj(_) => "java/lang/Class".into(),
        }
    }

    pub(crate) fn class_of(&self, r: usize) -> String {
        self.obj_class(&self.heap[r])
    }

    pub(crate) fn is_subtype(&self, from: &str, to: &str) -> bool {
        self.hierarchy.is_subtype(from, to).unwrap_or(false)
    }

    /// Allocates and returns a library exception with a message.
    pub(crate) fn throw_new(&mut self, class: &str, msg: Option<String>) -> Thrown {
        let mut fields = HashMap::new();
        if let Some(m) = msg {
            let s = self.new_string(m);
            fields.insert("detailMessage".to_string(), s);
        }
        match self.alloc(Obj::Instance { class: class.to_string(), fields }) {
            Value::Ref(r) => Thrown::Exception(r),
            _ => unreachable!(),
        }
    }

    pub(crate) fn npe<T>(&mut self, what: &str) -> Result<T, Thrown> {
        Err(self.throw_new("java/lang/NullPointerException", Some(what.to_string())))
    }

    fn ensure_init(&mut self, class: &str) -> Result<(), Thrown> {
        if !self.is_program_class(class) || !self.initialized.insert(class.to_string()) {
            return Ok(());
        }
        let sup = self.classes.classes[class].class.super_name().map(|s| s.into_owned());
        if let Some(s) = sup {
            self.ensure_init(&s)?;
        }
        if let Some(m) = self.lookup_declared(class, "<clinit>", "()V") {
            self.execute(m, Vec::new())?;
        }
        Ok(())
    }

    fn lookup_declared(&mut self, class: &str, name: &str, desc: &str) -> Option<Rc<Method>> {
        let key = (class.to_string(), name.to_string(), desc.to_string());
        if let Some(m) = self.methods.get(&key) {
            return m.clone();
        }
        let m = self.load_method(class, name, desc);
        self.methods.insert(key, m.clone());
        m
    }

    fn load_method(&self, class: &str, name: &str, desc: &str) -> Option<Rc<Method>> {
        let lc = self.classes.classes.get(class)?.clone();
        let cf = &lc.class;
        let mi = cf.find_method(name, desc)?;
        let info = &cf.methods[mi];
        if info.access_flags & ACC_ABSTRACT != 0 {
            return None;
        }
        let body = decode_code(info.code()?, &cf.pool).ok()?;
        let positions = body.positions();
        let end = body.instructions.len();
        let pos = |l: Label| if l == Label::END { Some(end) } else { positions.get(&l).copied() };
        let mut handlers = Vec::new();
        for h in &body.handlers {
            let catch = h.catch_type.as_ref().and_then(|c| body.resolve_class(&cf.pool, c));
            handlers.push((pos(h.start)?, pos(h.end)?, pos(h.handler)?, catch));
        }
        Some(Rc::new(Method {
            owner: class.to_string(),
            name: name.to_string(),
            descriptor: desc.to_string(),
            class: lc.clone(),
            body,
            positions,
            handlers,
        }))
    }

    /// Finds `name desc` in `class` or its program superclasses.
    fn resolve(&mut self, class: &str, name: &str, desc: &str) -> Option<Rc<Method>> {
        let mut cur = Some(class.to_string());
        while let Some(c) = cur {
            if !self.is_program_class(&c) {
                return None;
            }
            if let Some(m) = self.lookup_declared(&c, name, desc) {
                return Some(m);
            }
            cur = self.classes.classes[&c].class.super_name().map(|s| s.into_owned());
        }
        None
    }

    fn is_private(&self, class: &str, name: &str, desc: &str) -> bool {
        self.classes.classes.get(class).is_some_and(|lc| {
            lc.class.find_method(name, desc).is_some_and(|i| lc.class.methods[i].access_flags & ACC_PRIVATE != 0)
        })
    }

    /// Virtual dispatch on a receiver, falling back to the native library.
    pub(crate) fn call_virtual(&mut self, recv: Value, owner: &str, name: &str, desc: &str, args: Vec<Value>) -> Result<Option<Value>, Thrown> {
        let Value::Ref(r) = recv else { return self.npe(&format!("invoking {name}")) };
        let rt = self.class_of(r);
        if let Some(m) = self.resolve(&rt, name, desc) {
            let mut all = vec![recv];
            all.extend(args);
            return self.execute(m, all);
        }
        native::call_virtual(self, r, owner, name, desc, args)
    }

    /// Java's `String.valueOf(Object)`, dispatching to program `toString` overrides.
    pub(crate) fn stringify(&mut self, v: Value) -> Result<String, Thrown> {
        match v {
            Value::Null => Ok("null".into()),
            Value::Ref(r) => {
                let rt = self.class_of(r);
                if self.is_program_class(&rt) {
                    if let Some(m) = self.resolve(&rt, "toString", "()Ljava/lang/String;") {
                        let s = self.execute(m, vec![v])?.unwrap_or(Value::Null);
                        return Ok(self.str_of(s)?.unwrap_or("null").to_string());
                    }
                }
                native::default_string(self, r)
            }
            v => fault(format!("cannot stringify {v:?}")),
        }
    }

    fn execute(&mut self, m: Rc<Method>, args: Vec<Value>) -> Result<Option<Value>, Thrown> {
        if self.depth >= MAX_DEPTH {
            return Err(self.throw_new("java/lang/StackOverflowError", None));
        }
        self.depth += 1;
        let r = self.run_frame(&m, args);
        self.depth -= 1;
        r
    }

    fn run_frame(&mut self, m: &Method, args: Vec<Value>) -> Result<Option<Value>, Thrown> {
        let mut locals = vec![Value::Top; m.body.max_locals.max(1) as usize];
        let mut slot = 0;
        for a in args {
            if slot >= locals.len() {
                return fault("arguments exceed max_locals");
            }
            locals[slot] = a;
            slot += if a.wide() { 2 } else { 1 };
        }
        let mut f = Frame { locals, stack: Vec::new() };
        let traced = self.traced.contains(&m.owner);
        let mut pc = 0usize;
        loop {
            let Some(insn) = m.body.instructions.get(pc) else {
                return fault(format!("fell off the end of {}.{}", m.owner, m.name));
            };
            self.steps += 1;
            if self.steps > self.step_limit {
                return Err(Thrown::StepLimit);
            }
            if traced {
                self.coverage.insert((m.owner.clone(), m.name.clone(), m.descriptor.clone(), insn.label.0));
            }
            match self.step(m, insn, &mut f) {
                Ok(Step::Next) => pc += 1,
                Ok(Step::Jump(l)) => match m.positions.get(&l) {
                    Some(&p) => pc = p,
                    None => return fault("branch to unknown label"),
                },
                Ok(Step::Return(v)) => return Ok(v),
                Err(Thrown::Exception(e)) => {
                    let rt = self.class_of(e);
                    let handler = m.handlers.iter().find(|(s, end, _, c)| {
                        pc >= *s && pc < *end && c.as_ref().is_none_or(|c| self.is_subtype(&rt, c))
                    });
                    match handler {
                        Some(&(_, _, h, _)) => {
                            f.stack.clear();
                            f.stack.push(Value::Ref(e));
                            pc = h;
                        }
                        None => return Err(Thrown::Exception(e)),
                    }
                }
                Err(other) => return Err(other),
            }
        }
    }

    fn array_index(&mut self, f: &mut Frame) -> Result<(usize, usize), Thrown> {
        let i = f.int()?;
        let a = f.pop()?;
        let Value::Ref(r) = a else { return self.npe("array access") };
        let len = match &self.heap[r] {
            Obj::Array { items, .. } => items.len(),
            _ => return fault("not an array"),
        };
        if i < 0 || i as usize >= len {
            return Err(self.throw_new("java/lang/ArrayIndexOutOfBoundsException", Some(format!("Index {i} out of bounds for length {len}"))));
        }
        Ok((r, i as usize))
    }

    fn new_array(&mut self, class: String, len: i32) -> Result<Value, Thrown> {
        if len < 0 {
            return Err(self.throw_new("java/lang/NegativeArraySizeException", Some(len.to_string())));
        }
        let elem = Value::default_for(&class[1..]);
        Ok(self.alloc(Obj::Array { class, items: vec![elem; len as usize] }))
    }

    fn multi_array(&mut self, class: &str, dims: &[i32]) -> Result<Value, Thrown> {
        let arr = self.new_array(class.to_string(), dims[0])?;
        if dims.len() > 1 {
            let Value::Ref(r) = arr else { unreachable!() };
            for i in 0..dims[0] as usize {
                let sub = self.multi_array(&class[1..], &dims[1..])?;
                if let Obj::Array { items, .. } = &mut self.heap[r] {
                    items[i] = sub;
                }
            }
        }
        Ok(arr)
    }

    fn field_owner(&self, owner: &str, name: &str) -> Option<String> {
        let mut cur = Some(owner.to_string());
        while let Some(c) = cur {
            let lc = self.classes.classes.get(&c)?;
            if lc.class.fields.iter().any(|fi| fi.name(&lc.class.pool) == name) {
                return Some(c);
            }
            cur = lc.class.super_name().map(|s| s.into_owned());
        }
        None
    }

    fn step(&mut self, m: &Method, insn: &bytefix_core::codemodel::Instruction, f: &mut Frame) -> Result<Step, Thrown> {
        let pool = &m.class.class.pool;
        let op = insn.opcode;
        if let Some((kind, short)) = opcodes::load_kind(op) {
            let i = short.or(insn.local_index()).unwrap_or(0) as usize;
            let v = *f.locals.get(i).ok_or_else(|| Thrown::Fault("local out of range".into()))?;
            match (kind, v) {
                (Kind::Int, Value::Int(_)) | (Kind::Long, Value::Long(_)) | (Kind::Float, Value::Float(_)) | (Kind::Double, Value::Double(_)) => {}
                (Kind::Ref, Value::Null | Value::Ref(_)) => {}
                _ => return fault(format!("{} reads {v:?}", insn.mnemonic())),
            }
            f.push(v);
            return Ok(Step::Next);
        }
        if let Some((_, short)) = opcodes::store_kind(op) {
            let i = short.or(insn.local_index()).unwrap_or(0) as usize;
            let v = f.pop()?;
            let need = if v.wide() { i + 2 } else { i + 1 };
            if need > f.locals.len() {
                return fault("local out of range");
            }
            f.locals[i] = v;
            if v.wide() {
                f.locals[i + 1] = Value::Top;
            }
            return Ok(Step::Next);
        }
        if let Some(rk) = opcodes::return_kind(op) {
            return Ok(Step::Return(if rk.is_some() { Some(f.pop()?) } else { None }));
        }
        match op {
            0 => {}
            1 => f.push(Value::Null),
            2..=8 => f.push(Value::Int(op as i32 - 3)),
            9 | 10 => f.push(Value::Long((op - 9) as i64)),
            11..=13 => f.push(Value::Float((op - 11) as f32)),
            14 | 15 => f.push(Value::Double((op - 14) as f64)),
            16 | 17 => match insn.operand {
                Operand::Int(v) => f.push(Value::Int(v)),
                _ => return fault("push without immediate"),
            },
            18..=20 => {
                let v = match insn.constant(pool) {
                    Some(ConstValue::Int(v)) => Value::Int(v),
                    Some(ConstValue::Long(v)) => Value::Long(v),
                    Some(ConstValue::Float(b)) => Value::Float(f32::from_bits(b)),
                    Some(ConstValue::Double(b)) => Value::Double(f64::from_bits(b)),
                    Some(ConstValue::String(s)) => self.intern(&s),
                    Some(ConstValue::Class(c)) => self.alloc(Obj::ClassObj(c)),
                    _ => return fault("unsupported ldc constant"),
                };
                f.push(v);
            }
            46..=53 => {
                let (r, i) = self.array_index(f)?;
                let Obj::Array { items, .. } = &self.heap[r] else { unreachable!() };
                f.push(items[i]);
            }
            79..=86 => {
                let mut v = f.pop()?;
                let (r, i) = self.array_index(f)?;
                if let Value::Int(x) = v {
                    v = Value::Int(match op {
                        84 => {
                            // bastore also stores booleans
                            let is_bool = matches!(&self.heap[r], Obj::Array { class, .. } if class == "[Z");
                            if is_bool { x & 1 } else { x as i8 as i32 }
                        }
                        85 => x as u16 as i32,
                        86 => x as i16 as i32,
                        _ => x,
                    });
                }
                let Obj::Array { items, .. } = &mut self.heap[r] else { unreachable!() };
                items[i] = v;
            }
            87 => {
                f.raw_pop()?;
            }
            88 => {
                f.raw_pop()?;
                f.raw_pop()?;
            }
            89 => {
                let a = f.raw_pop()?;
                f.stack.extend([a, a]);
            }
            90 => {
                let a = f.raw_pop()?;
                let b = f.raw_pop()?;
                f.stack.extend([a, b, a]);
            }
            91 => {
                let a = f.raw_pop()?;
                let b = f.raw_pop()?;
                let c = f.raw_pop()?;
                f.stack.extend([a, c, b, a]);
            }
            92 => {
                let a = f.raw_pop()?;
                let b = f.raw_pop()?;
                f.stack.extend([b, a, b, a]);
            }
            93 => {
                let a = f.raw_pop()?;
                let b = f.raw_pop()?;
                let c = f.raw_pop()?;
                f.stack.extend([b, a, c, b, a]);
            }
            94 => {
                let a = f.raw_pop()?;
                let b = f.raw_pop()?;
                let c = f.raw_pop()?;
                let d = f.raw_pop()?;
                f.stack.extend([b, a, d, c, b, a]);
            }
            95 => {
                let a = f.raw_pop()?;
                let b = f.raw_pop()?;
                f.stack.extend([a, b]);
            }
            96..=119 => self.arith(op, f)?,
            120..=131 => self.bitwise(op, f)?,
            132 => match insn.operand {
                Operand::Iinc { local, delta } => match f.locals.get_mut(local as usize) {
                    Some(Value::Int(v)) => *v = v.wrapping_add(delta as i32),
                    _ => return fault("iinc on a non-int local"),
                },
                _ => return fault("iinc without operand"),
            },
            133..=147 => {
                let v = f.pop()?;
                let out = match (op, v) {
                    (133, Value::Int(x)) => Value::Long(x as i64),
                    (134, Value::Int(x)) => Value::Float(x as f32),
                    (135, Value::Int(x)) => Value::Double(x as f64),
                    (136, Value::Long(x)) => Value::Int(x as i32),
                    (137, Value::Long(x)) => Value::Float(x as f32),
                    (138, Value::Long(x)) => Value::Double(x as f64),
                    (139, Value::Float(x)) => Value::Int(x as i32),
                    (140, Value::Float(x)) => Value::Long(x as i64),
                    (141, Value::Float(x)) => Value::Double(x as f64),
                    (142, Value::Double(x)) => Value::Int(x as i32),
                    (143, Value::Double(x)) => Value::Long(x as i64),
                    (144, Value::Double(x)) => Value::Float(x as f32),
                    (145, Value::Int(x)) => Value::Int(x as i8 as i32),
                    (146, Value::Int(x)) => Value::Int(x as u16 as i32),
                    (147, Value::Int(x)) => Value::Int(x as i16 as i32),
                    _ => return fault(format!("{} on {v:?}", insn.mnemonic())),
                };
                f.push(out);
            }
            148..=152 => {
                let b = f.pop()?;
                let a = f.pop()?;
                let r = match (a, b) {
                    (Value::Long(x), Value::Long(y)) => x.cmp(&y) as i32,
                    (Value::Float(x), Value::Float(y)) => fcmp(x as f64, y as f64, op == 150),
                    (Value::Double(x), Value::Double(y)) => fcmp(x, y, op == 152),
                    _ => return fault("comparison type mismatch"),
                };
                f.push(Value::Int(r));
            }
            153..=158 => {
                let v = f.int()?;
                if cond(op - 153, v, 0) {
                    return Ok(Step::Jump(branch(insn)?));
                }
            }
            159..=164 => {
                let b = f.int()?;
                let a = f.int()?;
                if cond(op - 159, a, b) {
                    return Ok(Step::Jump(branch(insn)?));
                }
            }
            165 | 166 => {
                let b = f.pop()?;
                let a = f.pop()?;
                if (a == b) == (op == 165) {
                    return Ok(Step::Jump(branch(insn)?));
                }
            }
            167 | 200 => return Ok(Step::Jump(branch(insn)?)),
            170 => {
                let k = f.int()?;
                let Operand::Table { default, low, targets } = &insn.operand else { return fault("bad tableswitch") };
                let i = k as i64 - *low as i64;
                let t = if i >= 0 && (i as usize) < targets.len() { targets[i as usize] } else { *default };
                return Ok(Step::Jump(t));
            }
            171 => {
                let k = f.int()?;
                let Operand::Lookup { default, pairs } = &insn.operand else { return fault("bad lookupswitch") };
                let t = pairs.iter().find(|p| p.0 == k).map_or(*default, |p| p.1);
                return Ok(Step::Jump(t));
            }
            178..=181 => {
                let mr = insn.member(pool).ok_or_else(|| Thrown::Fault("field without reference".into()))?;
                match op {
                    178 | 179 => {
                        let Some(decl) = self.field_owner(&mr.owner, &mr.name) else {
                            if op == 178 {
                                let v = native::get_static(self, &mr.owner, &mr.name)?;
                                f.push(v);
                                return Ok(Step::Next);
                            }
                            return fault(format!("putstatic to library field {}", mr));
                        };
                        self.ensure_init(&decl)?;
                        let key = (decl, mr.name.clone());
                        if op == 178 {
                            let v = self.statics.get(&key).copied().unwrap_or_else(|| Value::default_for(&mr.descriptor));
                            f.push(v);
                        } else {
                            let v = f.pop()?;
                            self.statics.insert(key, v);
                        }
                    }
                    180 => {
                        let o = f.pop()?;
                        let Value::Ref(r) = o else { return self.npe(&format!("reading field {}", mr.name)) };
                        let Obj::Instance { fields, .. } = &self.heap[r] else { return fault("getfield on a library object") };
                        let v = fields.get(&mr.name).copied().unwrap_or_else(|| Value::default_for(&mr.descriptor));
                        f.push(v);
                    }
                    _ => {
                        let v = f.pop()?;
                        let o = f.pop()?;
                        let Value::Ref(r) = o else { return self.npe(&format!("writing field {}", mr.name)) };
                        let Obj::Instance { fields, .. } = &mut self.heap[r] else { return fault("putfield on a library object") };
                        fields.insert(mr.name.clone(), v);
                    }
                }
            }
            182..=185 => {
                let mr = insn.member(pool).ok_or_else(|| Thrown::Fault("invoke without reference".into()))?;
                let desc = MethodDescriptor::parse(&mr.descriptor).map_err(|e| Thrown::Fault(e.to_string()))?;
                let mut args = Vec::with_capacity(desc.params.len());
                for _ in &desc.params {
                    args.push(f.pop()?);
                }
                args.reverse();
                let ret = if op == 184 {
                    if self.is_program_class(&mr.owner) {
                        self.ensure_init(&mr.owner)?;
                        match self.resolve(&mr.owner, &mr.name, &mr.descriptor) {
                            Some(target) => self.execute(target, args)?,
                            None => return fault(format!("no static method {mr}")),
                        }
                    } else {
                        native::call_static(self, &mr.owner, &mr.name, &mr.descriptor, args)?
                    }
                } else {
                    let recv = f.pop()?;
                    if recv == Value::Null {
                        return self.npe(&format!("invoking {}", mr.name));
                    }
                    let direct = op == 183
                        && (mr.name == "<init>" || self.is_private(&mr.owner, &mr.name, &mr.descriptor) || mr.owner != m.owner);
                    if direct {
                        match self.resolve(&mr.owner, &mr.name, &mr.descriptor) {
                            Some(target) => {
                                let mut all = vec![recv];
                                all.extend(args);
                                self.execute(target, all)?
                            }
                            None => {
                                let Value::Ref(r) = recv else { return fault("receiver is not a reference") };
                                native::call_special(self, r, &mr.owner, &mr.name, &mr.descriptor, args)?
                            }
                        }
                    } else {
                        self.call_virtual(recv, &mr.owner, &mr.name, &mr.descriptor, args)?
                    }
                };
                match (ret, &desc.ret) {
                    (Some(v), Some(t)) => f.push(normalize(v, t)),
                    (None, None) => {}
                    _ => return fault(format!("return shape mismatch calling {mr}")),
                }
            }
            187 => {
                let c = insn.class_operand(pool).ok_or_else(|| Thrown::Fault("new without class".into()))?;
                let v = if self.is_program_class(&c) {
                    self.ensure_init(&c)?;
                    self.alloc(Obj::Instance { class: c, fields: HashMap::new() })
                } else {
                    native::new_object(self, &c)?
                };
                f.push(v);
            }
            188 => {
                let n = f.int()?;
                let Operand::ArrayType(t) = insn.operand else { return fault("newarray without type") };
                let d = match t {
                    4 => "[Z",
                    5 => "[C",
                    6 => "[F",
                    7 => "[D",
                    8 => "[B",
                    9 => "[S",
                    10 => "[I",
                    11 => "[J",
                    _ => return fault("bad newarray type"),
                };
                let v = self.new_array(d.to_string(), n)?;
                f.push(v);
            }
            189 => {
                let n = f.int()?;
                let c = insn.class_operand(pool).ok_or_else(|| Thrown::Fault("anewarray without class".into()))?;
                let elem = FieldType::from_class_operand(&c).map_err(|e| Thrown::Fault(e.to_string()))?;
                let v = self.new_array(format!("[{}", elem.descriptor()), n)?;
                f.push(v);
            }
            190 => {
                let a = f.pop()?;
                let Value::Ref(r) = a else { return self.npe("arraylength") };
                let Obj::Array { items, .. } = &self.heap[r] else { return fault("arraylength on a non-array") };
                f.push(Value::Int(items.len() as i32));
            }
            191 => {
                let e = f.pop()?;
                let Value::Ref(r) = e else { return self.npe("throw") };
                return Err(Thrown::Exception(r));
            }
            192 | 193 => {
                let c = insn.class_operand(pool).ok_or_else(|| Thrown::Fault("type check without class".into()))?;
                let v = f.pop()?;
                let ok = match v {
                    Value::Null => None,
                    Value::Ref(r) => Some(self.is_subtype(&self.class_of(r), &c)),
                    _ => return fault("type check on a primitive"),
                };
                if op == 192 {
                    if ok == Some(false) {
                        let from = self.class_of(match v {
                            Value::Ref(r) => r,
                            _ => unreachable!(),
                        });
                        return Err(self.throw_new("java/lang/ClassCastException", Some(format!("{from} cannot be cast to {c}"))));
                    }
                    f.push(v);
                } else {
                    f.push(Value::Int(ok.unwrap_or(false) as i32));
                }
            }
            194 | 195 => {
                if f.pop()? == Value::Null {
                    return self.npe("monitor");
                }
            }
            197 => {
                let Operand::MultiArray { dims, .. } = insn.operand else { return fault("bad multianewarray") };
                let c = insn.class_operand(pool).ok_or_else(|| Thrown::Fault("multianewarray without class".into()))?;
                let mut ds = Vec::new();
                for _ in 0..dims {
                    ds.push(f.int()?);
                }
                ds.reverse();
                let v = self.multi_array(&c, &ds)?;
                f.push(v);
            }
            198 | 199 => {
                let v = f.pop()?;
                if (v == Value::Null) == (op == 198) {
                    return Ok(Step::Jump(branch(insn)?));
                }
            }
            _ => return fault(format!("unsupported instruction {}", insn.mnemonic())),
        }
        Ok(Step::Next)
    }

    fn arith(&mut self, op: u8, f: &mut Frame) -> Result<(), Thrown> {
        let kind = (op - 96) % 4;
        let which = (op - 96) / 4;
        if which == 5 {
            let v = f.pop()?;
            f.push(match v {
                Value::Int(x) => Value::Int(x.wrapping_neg()),
                Value::Long(x) => Value::Long(x.wrapping_neg()),
                Value::Float(x) => Value::Float(-x),
                Value::Double(x) => Value::Double(-x),
                _ => return fault("neg on a reference"),
            });
            return Ok(());
        }
        let b = f.pop()?;
        let a = f.pop()?;
        let zero_div = |vm: &mut Vm| Err(vm.throw_new("java/lang/ArithmeticException", Some("/ by zero".into())));
        let v = match (kind, a, b) {
            (0, Value::Int(x), Value::Int(y)) => Value::Int(match which {
                0 => x.wrapping_add(y),
                1 => x.wrapping_sub(y),
                2 => x.wrapping_mul(y),
                3 if y == 0 => return zero_div(self),
                3 => x.wrapping_div(y),
                _ if y == 0 => return zero_div(self),
                _ => x.wrapping_rem(y),
            }),
            (1, Value::Long(x), Value::Long(y)) => Value::Long(match which {
                0 => x.wrapping_add(y),
                1 => x.wrapping_sub(y),
                2 => x.wrapping_mul(y),
                3 if y == 0 => return zero_div(self),
                3 => x.wrapping_div(y),
                _ if y == 0 => return zero_div(self),
                _ => x.wrapping_rem(y),
            }),
            (2, Value::Float(x), Value::Float(y)) => Value::Float(match which {
                0 => x + y,
                1 => x - y,
                2 => x * y,
                3 => x / y,
                _ => x % y,
            }),
            (3, Value::Double(x), Value::Double(y)) => Value::Double(match which {
                0 => x + y,
                1 => x - y,
                2 => x * y,
                3 => x / y,
                _ => x % y,
            }),
            _ => return fault(format!("arithmetic type mismatch {a:?} {b:?}")),
        };
        f.push(v);
        Ok(())
    }

    fn bitwise(&mut self, op: u8, f: &mut Frame) -> Result<(), Thrown> {
        let b = f.pop()?;
        let a = f.pop()?;
        let v = match (op, a, b) {
            (120, Value::Int(x), Value::Int(s)) => Value::Int(x.wrapping_shl(s as u32 & 31)),
            (121, Value::Long(x), Value::Int(s)) => Value::Long(x.wrapping_shl(s as u32 & 63)),
            (122, Value::Int(x), Value::Int(s)) => Value::Int(x >> (s & 31)),
            (123, Value::Long(x), Value::Int(s)) => Value::Long(x >> (s & 63)),
            (124, Value::Int(x), Value::Int(s)) => Value::Int(((x as u32) >> (s & 31)) as i32),
            (125, Value::Long(x), Value::Int(s)) => Value::Long(((x as u64) >> (s & 63)) as i64),
            (126, Value::Int(x), Value::Int(y)) => Value::Int(x & y),
            (127, Value::Long(x), Value::Long(y)) => Value::Long(x & y),
            (128, Value::Int(x), Value::Int(y)) => Value::Int(x | y),
            (129, Value::Long(x), Value::Long(y)) => Value::Long(x | y),
            (130, Value::Int(x), Value::Int(y)) => Value::Int(x ^ y),
            (131, Value::Long(x), Value::Long(y)) => Value::Long(x ^ y),
            _ => return fault("bitwise type mismatch"),
        };
        f.push(v);
        Ok(())
    }
}

/// Operand stack in slot form: wide values are followed by `Top`.
struct Frame {
    locals: Vec<Value>,
    stack: Vec<Value>,
}

impl Frame {
    fn push(&mut self, v: Value) {
        self.stack.push(v);
        if v.wide() {
            self.stack.push(Value::Top);
        }
    }

    fn raw_pop(&mut self) -> Result<Value, Thrown> {
        self.stack.pop().ok_or_else(|| Thrown::Fault("operand stack underflow".into()))
    }

    fn pop(&mut self) -> Result<Value, Thrown> {
        match self.raw_pop()? {
            Value::Top => {
                let v = self.raw_pop()?;
                if !v.wide() {
                    return fault("split wide value");
                }
                Ok(v)
            }
            v if v.wide() => fault("wide value without its second slot"),
            v => Ok(v),
        }
    }

    fn int(&mut self) -> Result<i32, Thrown> {
        match self.pop()? {
            Value::Int(v) => Ok(v),
            v => fault(format!("expected int, got {v:?}")),
        }
    }
}

fn branch(insn: &bytefix_core::codemodel::Instruction) -> Result<Label, Thrown> {
    match insn.operand {
        Operand::Branch(l) => Ok(l),
        _ => fault("branch without target"),
    }
}

/// eq, ne, lt, ge, gt, le
fn cond(k: u8, a: i32, b: i32) -> bool {
    match k {
        0 => a == b,
        1 => a != b,
        2 => a < b,
        3 => a >= b,
        4 => a > b,
        _ => a <= b,
    }
}

fn fcmp(x: f64, y: f64, nan_is_greater: bool) -> i32 {
    if x.is_nan() || y.is_nan() {
        return if nan_is_greater { 1 } else { -1 };
    }
    if x < y {
        -1
    } else if x > y {
        1
    } else {
        0
    }
}

/// Narrows an int returned for a sub-int type, as the callee's return would.
fn normalize(v: Value, t: &FieldType) -> Value {
    match (v, t) {
        (Value::Int(x), FieldType::Boolean) => Value::Int(x & 1),
        (Value::Int(x), FieldType::Byte) => Value::Int(x as i8 as i32),
        (Value::Int(x), FieldType::Char) => Value::Int(x as u16 as i32),
        (Value::Int(x), FieldType::Short) => Value::Int(x as i16 as i32),
        _ => v,
    }
}
