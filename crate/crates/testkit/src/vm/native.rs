//! The modelled slice of the Java library.

use super::{fault, Obj, Thrown, Value, Vm};

type Ret = Result<Option<Value>, Thrown>;

const THROWABLE: &str = "java/lang/Throwable";

fn int(v: Value) -> Result<i32, Thrown> {
    match v {
        Value::Int(x) => Ok(x),
        v => fault(format!("expected int argument, got {v:?}")),
    }
}

fn long(v: Value) -> Result<i64, Thrown> {
    match v {
        Value::Long(x) => Ok(x),
        v => fault(format!("expected long argument, got {v:?}")),
    }
}

fn double(v: Value) -> Result<f64, Thrown> {
    match v {
        Value::Double(x) => Ok(x),
        v => fault(format!("expected double argument, got {v:?}")),
    }
}

fn boolean(b: bool) -> Ret {
    Ok(Some(Value::Int(b as i32)))
}

fn char_of(x: i32) -> char {
    char::from_u32(x as u16 as u32).unwrap_or('\u{fffd}')
}

fn format_double(d: f64) -> String {
    if d.is_nan() {
        "NaN".into()
    } else if d.is_infinite() {
        if d > 0.0 { "Infinity".into() } else { "-Infinity".into() }
    } else if d == d.trunc() && d.abs() < 1e7 {
        format!("{d:.1}")
    } else {
        format!("{d}")
    }
}

/// Java string conversion of a value with static type `desc`.
fn to_text(vm: &mut Vm, v: Value, desc: &str) -> Result<String, Thrown> {
    Ok(match (v, desc) {
        (Value::Int(x), "C") => char_of(x).to_string(),
        (Value::Int(x), "Z") => (x != 0).to_string(),
        (Value::Int(x), _) => x.to_string(),
        (Value::Long(x), _) => x.to_string(),
        (Value::Float(x), _) => format_double(x as f64),
        (Value::Double(x), _) => format_double(x),
        (v, _) => vm.stringify(v)?,
    })
}

/// `Object.toString` and the library overrides.
pub(super) fn default_string(vm: &mut Vm, r: usize) -> Result<String, Thrown> {
    Ok(match vm.heap[r].clone() {
        Obj::Str(s) | Obj::Builder(s) => s,
        Obj::Boxed { class, value } => {
            let d = match class.as_str() {
                "java/lang/Character" => "C",
                "java/lang/Boolean" => "Z",
                _ => "",
            };
            to_text(vm, value, d)?
        }
        Obj::List { items, .. } => {
            let mut parts = Vec::new();
            for v in items {
                parts.push(vm.stringify(v)?);
            }
            format!("[{}]", parts.join(", "))
        }
        Obj::Instance { class, fields } if vm.is_subtype(&class, THROWABLE) => {
            let name = class.replace('/', ".");
            match fields.get("detailMessage").copied() {
                Some(m) => format!("{name}: {}", vm.str_of(m)?.unwrap_or("null")),
                None => name,
            }
        }
        Obj::ClassObj(c) => format!("class {}", c.replace('/', ".")),
        o => format!("{}@{r:x}", vm.obj_class(&o).replace('/', ".")),
    })
}

/// `equals` for the modelled value classes; identity otherwise.
fn java_equals(vm: &Vm, a: Value, b: Value) -> bool {
    match (a, b) {
        (Value::Ref(x), Value::Ref(y)) => match (&vm.heap[x], &vm.heap[y]) {
            (Obj::Str(s), Obj::Str(t)) => s == t,
            (Obj::Boxed { class: c, value: v }, Obj::Boxed { class: d, value: w }) => c == d && v == w,
            _ => x == y,
        },
        _ => a == b,
    }
}

fn java_hash(vm: &Vm, v: Value) -> i32 {
    match v {
        Value::Ref(r) => match &vm.heap[r] {
            Obj::Str(s) => string_hash(s),
            Obj::Boxed { value: Value::Int(x), .. } => *x,
            _ => r as i32,
        },
        _ => 0,
    }
}

fn string_hash(s: &str) -> i32 {
    s.encode_utf16().fold(0i32, |h, c| h.wrapping_mul(31).wrapping_add(c as i32))
}

pub(super) fn new_object(vm: &mut Vm, class: &str) -> Result<Value, Thrown> {
    let o = match class {
        "java/lang/Object" => Obj::Instance { class: class.into(), fields: Default::default() },
        "java/lang/String" => Obj::Str(String::new()),
        "java/lang/StringBuilder" | "java/lang/StringBuffer" => Obj::Builder(String::new()),
        "java/util/Random" | "java/security/SecureRandom" => Obj::Random { class: class.into(), seed: 0 },
        "java/util/ArrayList" | "java/util/LinkedList" => Obj::List { class: class.into(), items: Vec::new() },
        "java/util/HashMap" | "java/util/LinkedHashMap" | "java/util/TreeMap" => {
            Obj::Map { class: class.into(), entries: Vec::new() }
        }
        "java/lang/Integer" | "java/lang/Long" | "java/lang/Character" | "java/lang/Boolean" | "java/lang/Short"
        | "java/lang/Byte" | "java/lang/Double" | "java/lang/Float" => Obj::Boxed { class: class.into(), value: Value::Null },
        c if vm.is_subtype(c, THROWABLE) => Obj::Instance { class: class.into(), fields: Default::default() },
        c => return fault(format!("cannot instantiate library class {c}")),
    };
    Ok(vm.alloc(o))
}

const MULTIPLIER: i64 = 0x5DEECE66D;
const MASK: i64 = (1 << 48) - 1;

fn next_bits(vm: &mut Vm, r: usize, bits: u32) -> i32 {
    let Obj::Random { seed, .. } = &mut vm.heap[r] else { unreachable!() };
    *seed = (seed.wrapping_mul(MULTIPLIER).wrapping_add(0xB)) & MASK;
    (*seed >> (48 - bits)) as i32
}

fn next_int_bounded(vm: &mut Vm, r: usize, bound: i32) -> Result<i32, Thrown> {
    if bound <= 0 {
        return Err(vm.throw_new("java/lang/IllegalArgumentException", Some("bound must be positive".into())));
    }
    if bound & -bound == bound {
        return Ok(((bound as i64 * next_bits(vm, r, 31) as i64) >> 31) as i32);
    }
    loop {
        let bits = next_bits(vm, r, 31);
        let val = bits % bound;
        if bits.wrapping_sub(val).wrapping_add(bound - 1) >= 0 {
            return Ok(val);
        }
    }
}

pub(super) fn call_special(vm: &mut Vm, r: usize, owner: &str, name: &str, desc: &str, args: Vec<Value>) -> Ret {
    if name != "<init>" {
        return call_virtual(vm, r, owner, name, desc, args);
    }
    let obj = vm.heap[r].clone();
    match obj {
        Obj::Instance { .. } if owner == "java/lang/Object" => {}
        Obj::Instance { .. } if vm.is_subtype(owner, THROWABLE) => {
            let Obj::Instance { fields, .. } = &mut vm.heap[r] else { unreachable!() };
            match desc {
                "()V" => {}
                "(Ljava/lang/String;)V" => {
                    fields.insert("detailMessage".into(), args[0]);
                }
                "(Ljava/lang/String;Ljava/lang/Throwable;)V" => {
                    fields.insert("detailMessage".into(), args[0]);
                    fields.insert("cause".into(), args[1]);
                }
                "(Ljava/lang/Throwable;)V" => {
                    fields.insert("cause".into(), args[0]);
                    if args[0] != Value::Null {
                        let s = vm.stringify(args[0])?;
                        let s = vm.new_string(s);
                        if let Obj::Instance { fields, .. } = &mut vm.heap[r] {
                            fields.insert("detailMessage".into(), s);
                        }
                    }
                }
                _ => return fault(format!("unsupported constructor {owner}{desc}")),
            }
        }
        Obj::Str(_) => {
            let s = match desc {
                "()V" => String::new(),
                "(Ljava/lang/String;)V" => vm.str_of(args[0])?.unwrap_or_default().to_string(),
                "([C)V" => chars_of(vm, args[0])?,
                _ => return fault(format!("unsupported constructor String{desc}")),
            };
            vm.heap[r] = Obj::Str(s);
        }
        Obj::Builder(_) => {
            let s = match desc {
                "()V" | "(I)V" => String::new(),
                "(Ljava/lang/String;)V" => match vm.str_of(args[0])? {
                    Some(s) => s.to_string(),
                    None => return vm.npe("StringBuilder(null)"),
                },
                _ => return fault(format!("unsupported constructor StringBuilder{desc}")),
            };
            vm.heap[r] = Obj::Builder(s);
        }
        Obj::Random { .. } => {
            let s = match desc {
                "()V" => 42,
                "(J)V" => long(args[0])?,
                "([B)V" => 7,
                _ => return fault(format!("unsupported constructor {owner}{desc}")),
            };
            if let Obj::Random { seed, .. } = &mut vm.heap[r] {
                *seed = (s ^ MULTIPLIER) & MASK;
            }
        }
        Obj::List { .. } | Obj::Map { .. } => {
            if !matches!(desc, "()V" | "(I)V") {
                return fault(format!("unsupported constructor {owner}{desc}"));
            }
        }
        Obj::Boxed { class, .. } => {
            if args.len() != 1 {
                return fault(format!("unsupported constructor {class}{desc}"));
            }
            vm.heap[r] = Obj::Boxed { class, value: args[0] };
        }
        o => return fault(format!("unsupported constructor {}{desc}", vm.obj_class(&o))),
    }
    Ok(None)
}

fn chars_of(vm: &Vm, v: Value) -> Result<String, Thrown> {
    let Value::Ref(a) = v else { return fault("null char array") };
    let Obj::Array { items, .. } = &vm.heap[a] else { return fault("expected a char array") };
    Ok(items.iter().map(|c| if let Value::Int(x) = c { char_of(*x) } else { '?' }).collect())
}

fn char_array(vm: &mut Vm, s: &str) -> Value {
    let items = s.encode_utf16().map(|c| Value::Int(c as i32)).collect();
    vm.alloc(Obj::Array { class: "[C".into(), items })
}

pub(super) fn get_static(vm: &mut Vm, owner: &str, name: &str) -> Result<Value, Thrown> {
    match (owner, name) {
        ("java/lang/Boolean", "TRUE") => Ok(vm.alloc(Obj::Boxed { class: owner.into(), value: Value::Int(1) })),
        ("java/lang/Boolean", "FALSE") => Ok(vm.alloc(Obj::Boxed { class: owner.into(), value: Value::Int(0) })),
        ("java/lang/Integer", "MAX_VALUE") => Ok(Value::Int(i32::MAX)),
        ("java/lang/Integer", "MIN_VALUE") => Ok(Value::Int(i32::MIN)),
        _ => fault(format!("unsupported static field {owner}.{name}")),
    }
}

pub(super) fn call_static(vm: &mut Vm, owner: &str, name: &str, desc: &str, args: Vec<Value>) -> Ret {
    let a = |i: usize| args[i];
    let v = match (owner, name, desc) {
        ("java/lang/Math", "abs", "(I)I") => Value::Int(int(a(0))?.wrapping_abs()),
        ("java/lang/Math", "abs", "(J)J") => Value::Long(long(a(0))?.wrapping_abs()),
        ("java/lang/Math", "abs", "(D)D") => Value::Double(double(a(0))?.abs()),
        ("java/lang/Math", "max", "(II)I") => Value::Int(int(a(0))?.max(int(a(1))?)),
        ("java/lang/Math", "min", "(II)I") => Value::Int(int(a(0))?.min(int(a(1))?)),
        ("java/lang/Math", "max", "(JJ)J") => Value::Long(long(a(0))?.max(long(a(1))?)),
        ("java/lang/Math", "min", "(JJ)J") => Value::Long(long(a(0))?.min(long(a(1))?)),
        ("java/lang/Math", "max", "(DD)D") => Value::Double(double(a(0))?.max(double(a(1))?)),
        ("java/lang/Math", "min", "(DD)D") => Value::Double(double(a(0))?.min(double(a(1))?)),
        ("java/lang/Integer", "parseInt", "(Ljava/lang/String;)I") => {
            let s = vm.str_of(a(0))?.map(str::to_string);
            match s.as_deref().and_then(|s| s.parse::<i32>().ok()) {
                Some(x) => Value::Int(x),
                None => {
                    let msg = format!("For input string: \"{}\"", s.unwrap_or_default());
                    return Err(vm.throw_new("java/lang/NumberFormatException", Some(msg)));
                }
            }
        }
        ("java/lang/Integer", "valueOf", "(I)Ljava/lang/Integer;")
        | ("java/lang/Long", "valueOf", "(J)Ljava/lang/Long;")
        | ("java/lang/Character", "valueOf", "(C)Ljava/lang/Character;")
        | ("java/lang/Boolean", "valueOf", "(Z)Ljava/lang/Boolean;") => vm.alloc(Obj::Boxed { class: owner.into(), value: a(0) }),
        ("java/lang/Integer", "toString", "(I)Ljava/lang/String;") => {
            let s = int(a(0))?.to_string();
            vm.new_string(s)
        }
        ("java/lang/Integer", "bitCount", "(I)I") => Value::Int(int(a(0))?.count_ones() as i32),
        ("java/lang/Long", "bitCount", "(J)I") => Value::Int(long(a(0))?.count_ones() as i32),
        ("java/lang/Double", "isNaN", "(D)Z") => return boolean(double(a(0))?.is_nan()),
        ("java/lang/Character", _, "(C)Z") => {
            let c = char_of(int(a(0))?);
            return boolean(match name {
                "isDigit" => c.is_ascii_digit(),
                "isLetter" => c.is_alphabetic(),
                "isLetterOrDigit" => c.is_alphanumeric(),
                "isWhitespace" => c.is_whitespace(),
                "isUpperCase" => c.is_uppercase(),
                "isLowerCase" => c.is_lowercase(),
                _ => return fault(format!("unsupported Character.{name}")),
            });
        }
        ("java/lang/Character", "toUpperCase", "(C)C") => Value::Int(char_of(int(a(0))?).to_ascii_uppercase() as i32),
        ("java/lang/Character", "toLowerCase", "(C)C") => Value::Int(char_of(int(a(0))?).to_ascii_lowercase() as i32),
        ("java/lang/String", "valueOf", d) => {
            let s = if d == "([C)Ljava/lang/String;" {
                chars_of(vm, a(0))?
            } else {
                let pd = &d[1..d.find(')').unwrap_or(1)];
                to_text(vm, a(0), pd)?
            };
            vm.new_string(s)
        }
        ("java/lang/System", "arraycopy", "(Ljava/lang/Object;ILjava/lang/Object;II)V") => {
            let (Value::Ref(src), Value::Ref(dst)) = (a(0), a(2)) else { return vm.npe("arraycopy") };
            let (sp, dp, n) = (int(a(1))?, int(a(3))?, int(a(4))?);
            let Obj::Array { items: s, .. } = &vm.heap[src] else { return fault("arraycopy source is not an array") };
            let slen = s.len() as i64;
            let dlen = match &vm.heap[dst] {
                Obj::Array { items, .. } => items.len() as i64,
                _ => return fault("arraycopy target is not an array"),
            };
            if sp < 0 || dp < 0 || n < 0 || sp as i64 + n as i64 > slen || dp as i64 + n as i64 > dlen {
                return Err(vm.throw_new("java/lang/ArrayIndexOutOfBoundsException", Some("arraycopy".into())));
            }
            let chunk: Vec<Value> = s[sp as usize..(sp + n) as usize].to_vec();
            if let Obj::Array { items, .. } = &mut vm.heap[dst] {
                items[dp as usize..(dp + n) as usize].copy_from_slice(&chunk);
            }
            return Ok(None);
        }
        ("java/util/Objects", "equals", _) => return boolean(java_equals(vm, a(0), a(1))),
        ("java/util/Objects", "requireNonNull", _) => {
            if a(0) == Value::Null {
                return vm.npe("requireNonNull");
            }
            a(0)
        }
        _ => return fault(format!("unsupported static {owner}.{name}{desc}")),
    };
    Ok(Some(v))
}

pub(super) fn call_virtual(vm: &mut Vm, r: usize, owner: &str, name: &str, desc: &str, args: Vec<Value>) -> Ret {
    let recv = Value::Ref(r);
    match vm.heap[r].clone() {
        Obj::Str(s) => string_method(vm, &s, name, desc, &args),
        Obj::Builder(mut s) => {
            let out = match (name, desc) {
                ("append", d) => {
                    let pd = &d[1..d.find(')').unwrap_or(1)];
                    let t = match pd {
                        "[C" => chars_of(vm, args[0])?,
                        _ => to_text(vm, args[0], pd)?,
                    };
                    s.push_str(&t);
                    Some(recv)
                }
                ("toString", _) => Some(vm.new_string(s.clone())),
                ("length", _) => Some(Value::Int(s.encode_utf16().count() as i32)),
                ("reverse", _) => {
                    s = s.chars().rev().collect();
                    Some(recv)
                }
                ("charAt", _) => return string_method(vm, &s, name, desc, &args),
                ("setLength", "(I)V") => {
                    let n = int(args[0])?.max(0) as usize;
                    s = s.chars().take(n).collect();
                    None
                }
                _ => return fault(format!("unsupported StringBuilder.{name}{desc}")),
            };
            vm.heap[r] = Obj::Builder(s);
            Ok(out)
        }
        Obj::Random { .. } => match (name, desc) {
            ("nextInt", "(I)I") => {
                let b = int(args[0])?;
                Ok(Some(Value::Int(next_int_bounded(vm, r, b)?)))
            }
            ("nextInt", "()I") => Ok(Some(Value::Int(next_bits(vm, r, 32)))),
            ("nextBoolean", _) => boolean(next_bits(vm, r, 1) != 0),
            ("nextLong", _) => {
                let hi = next_bits(vm, r, 32) as i64;
                let lo = next_bits(vm, r, 32) as i64;
                Ok(Some(Value::Long((hi << 32).wrapping_add(lo))))
            }
            ("nextDouble", _) => {
                let hi = next_bits(vm, r, 26) as i64;
                let lo = next_bits(vm, r, 27) as i64;
                Ok(Some(Value::Double(((hi << 27) + lo) as f64 * (1.0 / (1i64 << 53) as f64))))
            }
            _ => object_method(vm, r, owner, name, desc, &args),
        },
        Obj::Boxed { value, .. } => match name {
            "intValue" | "longValue" | "booleanValue" | "charValue" | "doubleValue" | "shortValue" | "byteValue"
            | "floatValue" => {
                let want = &desc[desc.find(')').map_or(0, |i| i + 1)..];
                Ok(Some(match (value, want) {
                    (Value::Int(x), "J") => Value::Long(x as i64),
                    (Value::Int(x), "D") => Value::Double(x as f64),
                    (Value::Long(x), "I") => Value::Int(x as i32),
                    (Value::Double(x), "I") => Value::Int(x as i32),
                    (v, _) => v,
                }))
            }
            _ => object_method(vm, r, owner, name, desc, &args),
        },
        Obj::List { mut items, class } => {
            let out = match (name, desc) {
                ("add", "(Ljava/lang/Object;)Z") => {
                    items.push(args[0]);
                    Some(Value::Int(1))
                }
                ("get", _) | ("remove", "(I)Ljava/lang/Object;") | ("set", _) => {
                    let i = int(args[0])?;
                    if i < 0 || i as usize >= items.len() {
                        let msg = format!("Index {i} out of bounds for length {}", items.len());
                        return Err(vm.throw_new("java/lang/IndexOutOfBoundsException", Some(msg)));
                    }
                    let i = i as usize;
                    match name {
                        "get" => Some(items[i]),
                        "set" => Some(std::mem::replace(&mut items[i], args[1])),
                        _ => Some(items.remove(i)),
                    }
                }
                ("size", _) => Some(Value::Int(items.len() as i32)),
                ("isEmpty", _) => Some(Value::Int(items.is_empty() as i32)),
                ("contains", _) => Some(Value::Int(items.iter().any(|v| java_equals(vm, *v, args[0])) as i32)),
                ("clear", _) => {
                    items.clear();
                    None
                }
                ("iterator", _) => Some(vm.alloc(Obj::Iter { items: items.clone(), pos: 0 })),
                _ => return object_method(vm, r, owner, name, desc, &args),
            };
            vm.heap[r] = Obj::List { class, items };
            Ok(out)
        }
        Obj::Map { mut entries, class } => {
            let find = |vm: &Vm, entries: &[(Value, Value)], k: Value| entries.iter().position(|e| java_equals(vm, e.0, k));
            let out = match name {
                "put" => match find(vm, &entries, args[0]) {
                    Some(i) => Some(std::mem::replace(&mut entries[i].1, args[1])),
                    None => {
                        entries.push((args[0], args[1]));
                        Some(Value::Null)
                    }
                },
                "get" => Some(find(vm, &entries, args[0]).map_or(Value::Null, |i| entries[i].1)),
                "containsKey" => Some(Value::Int(find(vm, &entries, args[0]).is_some() as i32)),
                "remove" => Some(match find(vm, &entries, args[0]) {
                    Some(i) => entries.remove(i).1,
                    None => Value::Null,
                }),
                "size" => Some(Value::Int(entries.len() as i32)),
                "isEmpty" => Some(Value::Int(entries.is_empty() as i32)),
                _ => return object_method(vm, r, owner, name, desc, &args),
            };
            vm.heap[r] = Obj::Map { class, entries };
            Ok(out)
        }
        Obj::Iter { items, pos } => match name {
            "hasNext" => boolean(pos < items.len()),
            "next" => {
                if pos >= items.len() {
                    return Err(vm.throw_new("java/util/NoSuchElementException", None));
                }
                vm.heap[r] = Obj::Iter { items: items.clone(), pos: pos + 1 };
                Ok(Some(items[pos]))
            }
            _ => object_method(vm, r, owner, name, desc, &args),
        },
        Obj::Instance { fields, class } if vm.is_subtype(&class, THROWABLE) => match name {
            "getMessage" | "getLocalizedMessage" => Ok(Some(fields.get("detailMessage").copied().unwrap_or(Value::Null))),
            "getCause" => Ok(Some(fields.get("cause").copied().unwrap_or(Value::Null))),
            _ => object_method(vm, r, owner, name, desc, &args),
        },
        Obj::ClassObj(c) => match name {
            "getName" => Ok(Some(vm.new_string(c.replace('/', ".")))),
            _ => object_method(vm, r, owner, name, desc, &args),
        },
        _ => object_method(vm, r, owner, name, desc, &args),
    }
}

fn object_method(vm: &mut Vm, r: usize, owner: &str, name: &str, desc: &str, args: &[Value]) -> Ret {
    match (name, desc) {
        ("equals", "(Ljava/lang/Object;)Z") => boolean(java_equals(vm, Value::Ref(r), args[0])),
        ("hashCode", "()I") => Ok(Some(Value::Int(java_hash(vm, Value::Ref(r))))),
        ("toString", "()Ljava/lang/String;") => {
            let s = default_string(vm, r)?;
            Ok(Some(vm.new_string(s)))
        }
        ("getClass", "()Ljava/lang/Class;") => {
            let c = vm.class_of(r);
            Ok(Some(vm.alloc(Obj::ClassObj(c))))
        }
        _ => fault(format!("unsupported method {owner}.{name}{desc} on {}", vm.class_of(r))),
    }
}

fn string_arg(vm: &mut Vm, v: Value) -> Result<String, Thrown> {
    match vm.str_of(v)? {
        Some(s) => Ok(s.to_string()),
        None => vm.npe("string argument"),
    }
}

fn string_method(vm: &mut Vm, s: &str, name: &str, desc: &str, args: &[Value]) -> Ret {
    let chars: Vec<char> = s.chars().collect();
    let len = chars.len() as i32;
    let sioobe = |vm: &mut Vm, i: i32| Err(vm.throw_new("java/lang/StringIndexOutOfBoundsException", Some(format!("index {i}, length {len}"))));
    let text = |vm: &mut Vm, t: String| Ok(Some(vm.new_string(t)));
    match (name, desc) {
        ("length", _) => Ok(Some(Value::Int(len))),
        ("isEmpty", _) => boolean(s.is_empty()),
        ("charAt", _) => {
            let i = int(args[0])?;
            if i < 0 || i >= len {
                return sioobe(vm, i);
            }
            Ok(Some(Value::Int(chars[i as usize] as i32)))
        }
        ("equals", _) => {
            let eq = matches!(args[0], Value::Ref(o) if matches!(&vm.heap[o], Obj::Str(t) if t == s));
            boolean(eq)
        }
        ("equalsIgnoreCase", _) => {
            let t = vm.str_of(args[0])?.map(str::to_lowercase);
            boolean(t.as_deref() == Some(s.to_lowercase().as_str()))
        }
        ("hashCode", _) => Ok(Some(Value::Int(string_hash(s)))),
        ("toString", _) | ("intern", _) => {
            let v = vm.intern(s);
            Ok(Some(v))
        }
        ("trim", _) => text(vm, s.trim_matches(|c: char| c <= ' ').to_string()),
        ("toUpperCase", "()Ljava/lang/String;") => text(vm, s.to_uppercase()),
        ("toLowerCase", "()Ljava/lang/String;") => text(vm, s.to_lowercase()),
        ("toCharArray", _) => Ok(Some(char_array(vm, s))),
        ("concat", _) => {
            let t = string_arg(vm, args[0])?;
            text(vm, format!("{s}{t}"))
        }
        ("replace", "(CC)Ljava/lang/String;") => {
            let (a, b) = (char_of(int(args[0])?), char_of(int(args[1])?));
            text(vm, s.replace(a, &b.to_string()))
        }
        ("replace", _) => {
            let a = string_arg(vm, args[0])?;
            let b = string_arg(vm, args[1])?;
            text(vm, s.replace(&a, &b))
        }
        ("contains", _) => {
            let t = string_arg(vm, args[0])?;
            boolean(s.contains(&t))
        }
        ("startsWith", "(Ljava/lang/String;)Z") => {
            let t = string_arg(vm, args[0])?;
            boolean(s.starts_with(&t))
        }
        ("endsWith", _) => {
            let t = string_arg(vm, args[0])?;
            boolean(s.ends_with(&t))
        }
        ("indexOf", "(I)I") => {
            let c = char_of(int(args[0])?);
            Ok(Some(Value::Int(chars.iter().position(|x| *x == c).map_or(-1, |p| p as i32))))
        }
        ("indexOf", "(Ljava/lang/String;)I") => {
            let t = string_arg(vm, args[0])?;
            Ok(Some(Value::Int(s.find(&t).map_or(-1, |b| s[..b].chars().count() as i32))))
        }
        ("lastIndexOf", "(I)I") => {
            let c = char_of(int(args[0])?);
            Ok(Some(Value::Int(chars.iter().rposition(|x| *x == c).map_or(-1, |p| p as i32))))
        }
        ("substring", _) => {
            let b = int(args[0])?;
            let e = if args.len() > 1 { int(args[1])? } else { len };
            if b < 0 || e > len || b > e {
                return sioobe(vm, b);
            }
            text(vm, chars[b as usize..e as usize].iter().collect())
        }
        ("compareTo", _) => {
            let t = string_arg(vm, args[0])?;
            let (a, b): (Vec<u16>, Vec<u16>) = (s.encode_utf16().collect(), t.encode_utf16().collect());
            let k = a.iter().zip(&b).find(|(x, y)| x != y);
            Ok(Some(Value::Int(match k {
                Some((x, y)) => *x as i32 - *y as i32,
                None => a.len() as i32 - b.len() as i32,
            })))
        }
        _ => fault(format!("unsupported String.{name}{desc}")),
    }
}
