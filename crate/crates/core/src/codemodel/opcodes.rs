//! Opcode table: mnemonic, operand layout and slot-level stack effect.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// No operand bytes.
    None,
    /// u8 local index (u16 after `wide`).
    Local,
    /// u8 local, i8 constant (u16, i16 after `wide`).
    Iinc,
    /// Signed byte immediate.
    Byte,
    /// Signed short immediate.
    Short,
    /// u8 constant-pool index.
    Pool8,
    /// u16 constant-pool index.
    Pool16,
    /// u16 index, u8 count, u8 zero.
    Interface,
    /// u16 index, two zero bytes.
    Dynamic,
    /// u16 index, u8 dimensions.
    MultiArray,
    /// u8 primitive array type code.
    ArrayType,
    Branch16,
    Branch32,
    TableSwitch,
    LookupSwitch,
    WidePrefix,
}

/// Stack slots consumed or produced; `POLY` means the count comes from a descriptor.
pub const POLY: i8 = -1;

#[derive(Debug, Clone, Copy)]
pub struct OpInfo {
    pub name: &'static str,
    pub format: Format,
    pub pops: i8,
    pub pushes: i8,
}

macro_rules! table {
    ($($code:literal $name:literal $fmt:ident $pops:literal $pushes:literal;)*) => {
        const fn build() -> [Option<OpInfo>; 256] {
            let mut t: [Option<OpInfo>; 256] = [None; 256];
            $( t[$code] = Some(OpInfo { name: $name, format: Format::$fmt, pops: $pops, pushes: $pushes }); )*
            t
        }
    };
}

table! {
    0 "nop" None 0 0;
    1 "aconst_null" None 0 1;
    2 "iconst_m1" None 0 1;
    3 "iconst_0" None 0 1;
    4 "iconst_1" None 0 1;
    5 "iconst_2" None 0 1;
    6 "iconst_3" None 0 1;
    7 "iconst_4" None 0 1;
    8 "iconst_5" None 0 1;
    9 "lconst_0" None 0 2;
    10 "lconst_1" None 0 2;
    11 "fconst_0" None 0 1;
    12 "fconst_1" None 0 1;
    13 "fconst_2" None 0 1;
    14 "dconst_0" None 0 2;
    15 "dconst_1" None 0 2;
    16 "bipush" Byte 0 1;
    17 "sipush" Short 0 1;
    18 "ldc" Pool8 0 1;
    19 "ldc_w" Pool16 0 1;
    20 "ldc2_w" Pool16 0 2;
    21 "iload" Local 0 1;
    22 "lload" Local 0 2;
    23 "fload" Local 0 1;
    24 "dload" Local 0 2;
    25 "aload" Local 0 1;
    26 "iload_0" None 0 1;
    27 "iload_1" None 0 1;
    28 "iload_2" None 0 1;
    29 "iload_3" None 0 1;
    30 "lload_0" None 0 2;
    31 "lload_1" None 0 2;
    32 "lload_2" None 0 2;
    33 "lload_3" None 0 2;
    34 "fload_0" None 0 1;
    35 "fload_1" None 0 1;
    36 "fload_2" None 0 1;
    37 "fload_3" None 0 1;
    38 "dload_0" None 0 2;
    39 "dload_1" None 0 2;
    40 "dload_2" None 0 2;
    41 "dload_3" None 0 2;
    42 "aload_0" None 0 1;
    43 "aload_1" None 0 1;
    44 "aload_2" None 0 1;
    45 "aload_3" None 0 1;
    46 "iaload" None 2 1;
    47 "laload" None 2 2;
    48 "faload" None 2 1;
    49 "daload" None 2 2;
    50 "aaload" None 2 1;
    51 "baload" None 2 1;
    52 "caload" None 2 1;
    53 "saload" None 2 1;
    54 "istore" Local 1 0;
    55 "lstore" Local 2 0;
    56 "fstore" Local 1 0;
    57 "dstore" Local 2 0;
    58 "astore" Local 1 0;
    59 "istore_0" None 1 0;
    60 "istore_1" None 1 0;
    61 "istore_2" None 1 0;
    62 "istore_3" None 1 0;
    63 "lstore_0" None 2 0;
    64 "lstore_1" None 2 0;
    65 "lstore_2" None 2 0;
    66 "lstore_3" None 2 0;
    67 "fstore_0" None 1 0;
    68 "fstore_1" None 1 0;
    69 "fstore_2" None 1 0;
    70 "fstore_3" None 1 0;
    71 "dstore_0" None 2 0;
    72 "dstore_1" None 2 0;
    73 "dstore_2" None 2 0;
    74 "dstore_3" None 2 0;
    75 "astore_0" None 1 0;
    76 "astore_1" None 1 0;
    77 "astore_2" None 1 0;
    78 "astore_3" None 1 0;
    79 "iastore" None 3 0;
    80 "lastore" None 4 0;
    81 "fastore" None 3 0;
    82 "dastore" None 4 0;
    83 "aastore" None 3 0;
    84 "bastore" None 3 0;
    85 "castore" None 3 0;
    86 "sastore" None 3 0;
    87 "pop" None 1 0;
    88 "pop2" None 2 0;
    89 "dup" None 1 2;
    90 "dup_x1" None 2 3;
    91 "dup_x2" None 3 4;
    92 "dup2" None 2 4;
    93 "dup2_x1" None 3 5;
    94 "dup2_x2" None 4 6;
    95 "swap" None 2 2;
    96 "iadd" None 2 1;
    97 "ladd" None 4 2;
    98 "fadd" None 2 1;
    99 "dadd" None 4 2;
    100 "isub" None 2 1;
    101 "lsub" None 4 2;
    102 "fsub" None 2 1;
    103 "dsub" None 4 2;
    104 "imul" None 2 1;
    105 "lmul" None 4 2;
    106 "fmul" None 2 1;
    107 "dmul" None 4 2;
    108 "idiv" None 2 1;
    109 "ldiv" None 4 2;
    110 "fdiv" None 2 1;
    111 "ddiv" None 4 2;
    112 "irem" None 2 1;
    113 "lrem" None 4 2;
    114 "frem" None 2 1;
    115 "drem" None 4 2;
    116 "ineg" None 1 1;
    117 "lneg" None 2 2;
    118 "fneg" None 1 1;
    119 "dneg" None 2 2;
    120 "ishl" None 2 1;
    121 "lshl" None 3 2;
    122 "ishr" None 2 1;
    123 "lshr" None 3 2;
    124 "iushr" None 2 1;
    125 "lushr" None 3 2;
    126 "iand" None 2 1;
    127 "land" None 4 2;
    128 "ior" None 2 1;
    129 "lor" None 4 2;
    130 "ixor" None 2 1;
    131 "lxor" None 4 2;
    132 "iinc" Iinc 0 0;
    133 "i2l" None 1 2;
    134 "i2f" None 1 1;
    135 "i2d" None 1 2;
    136 "l2i" None 2 1;
    137 "l2f" None 2 1;
    138 "l2d" None 2 2;
    139 "f2i" None 1 1;
    140 "f2l" None 1 2;
    141 "f2d" None 1 2;
    142 "d2i" None 2 1;
    143 "d2l" None 2 2;
    144 "d2f" None 2 1;
    145 "i2b" None 1 1;
    146 "i2c" None 1 1;
    147 "i2s" None 1 1;
    148 "lcmp" None 4 1;
    149 "fcmpl" None 2 1;
    150 "fcmpg" None 2 1;
    151 "dcmpl" None 4 1;
    152 "dcmpg" None 4 1;
    153 "ifeq" Branch16 1 0;
    154 "ifne" Branch16 1 0;
    155 "iflt" Branch16 1 0;
    156 "ifge" Branch16 1 0;
    157 "ifgt" Branch16 1 0;
    158 "ifle" Branch16 1 0;
    159 "if_icmpeq" Branch16 2 0;
    160 "if_icmpne" Branch16 2 0;
    161 "if_icmplt" Branch16 2 0;
    162 "if_icmpge" Branch16 2 0;
    163 "if_icmpgt" Branch16 2 0;
    164 "if_icmple" Branch16 2 0;
    165 "if_acmpeq" Branch16 2 0;
    166 "if_acmpne" Branch16 2 0;
    167 "goto" Branch16 0 0;
    168 "jsr" Branch16 0 1;
    169 "ret" Local 0 0;
    170 "tableswitch" TableSwitch 1 0;
    171 "lookupswitch" LookupSwitch 1 0;
    172 "ireturn" None 1 0;
    173 "lreturn" None 2 0;
    174 "freturn" None 1 0;
    175 "dreturn" None 2 0;
    176 "areturn" None 1 0;
    177 "return" None 0 0;
    178 "getstatic" Pool16 -1 -1;
    179 "putstatic" Pool16 -1 -1;
    180 "getfield" Pool16 -1 -1;
    181 "putfield" Pool16 -1 -1;
    182 "invokevirtual" Pool16 -1 -1;
    183 "invokespecial" Pool16 -1 -1;
    184 "invokestatic" Pool16 -1 -1;
    185 "invokeinterface" Interface -1 -1;
    186 "invokedynamic" Dynamic -1 -1;
    187 "new" Pool16 0 1;
    188 "newarray" ArrayType 1 1;
    189 "anewarray" Pool16 1 1;
    190 "arraylength" None 1 1;
    191 "athrow" None 1 0;
    192 "checkcast" Pool16 1 1;
    193 "instanceof" Pool16 1 1;
    194 "monitorenter" None 1 0;
    195 "monitorexit" None 1 0;
    196 "wide" WidePrefix 0 0;
    197 "multianewarray" MultiArray -1 1;
    198 "ifnull" Branch16 1 0;
    199 "ifnonnull" Branch16 1 0;
    200 "goto_w" Branch32 0 0;
    201 "jsr_w" Branch32 0 1;
}

static TABLE: [Option<OpInfo>; 256] = build();

pub fn info(opcode: u8) -> Option<&'static OpInfo> {
    TABLE[opcode as usize].as_ref()
}

pub fn name(opcode: u8) -> &'static str {
    info(opcode).map_or("<invalid>", |i| i.name)
}

pub fn by_name(name: &str) -> Option<u8> {
    (0..=255u8).find(|&op| info(op).is_some_and(|i| i.name == name))
}

/// Number of defined opcodes.
pub fn defined_count() -> usize {
    TABLE.iter().filter(|e| e.is_some()).count()
}

pub const NOP: u8 = 0;
pub const ACONST_NULL: u8 = 1;
pub const ICONST_M1: u8 = 2;
pub const ICONST_0: u8 = 3;
pub const ICONST_1: u8 = 4;
pub const ICONST_5: u8 = 8;
pub const LCONST_0: u8 = 9;
pub const LCONST_1: u8 = 10;
pub const FCONST_0: u8 = 11;
pub const FCONST_2: u8 = 13;
pub const DCONST_0: u8 = 14;
pub const DCONST_1: u8 = 15;
pub const BIPUSH: u8 = 16;
pub const SIPUSH: u8 = 17;
pub const LDC: u8 = 18;
pub const LDC_W: u8 = 19;
pub const LDC2_W: u8 = 20;
pub const ILOAD: u8 = 21;
pub const LLOAD: u8 = 22;
pub const FLOAD: u8 = 23;
pub const DLOAD: u8 = 24;
pub const ALOAD: u8 = 25;
pub const ILOAD_0: u8 = 26;
pub const ALOAD_0: u8 = 42;
pub const ALOAD_3: u8 = 45;
pub const IALOAD: u8 = 46;
pub const SALOAD: u8 = 53;
pub const ISTORE: u8 = 54;
pub const LSTORE: u8 = 55;
pub const FSTORE: u8 = 56;
pub const DSTORE: u8 = 57;
pub const ASTORE: u8 = 58;
pub const ISTORE_0: u8 = 59;
pub const ASTORE_3: u8 = 78;
pub const IASTORE: u8 = 79;
pub const SASTORE: u8 = 86;
pub const POP: u8 = 87;
pub const POP2: u8 = 88;
pub const DUP: u8 = 89;
pub const DUP_X1: u8 = 90;
pub const DUP_X2: u8 = 91;
pub const DUP2: u8 = 92;
pub const DUP2_X1: u8 = 93;
pub const DUP2_X2: u8 = 94;
pub const SWAP: u8 = 95;
pub const IADD: u8 = 96;
pub const LADD: u8 = 97;
pub const FADD: u8 = 98;
pub const DADD: u8 = 99;
pub const ISUB: u8 = 100;
pub const IMUL: u8 = 104;
pub const IDIV: u8 = 108;
pub const IREM: u8 = 112;
pub const DREM: u8 = 115;
pub const INEG: u8 = 116;
pub const DNEG: u8 = 119;
pub const ISHL: u8 = 120;
pub const LSHL: u8 = 121;
pub const ISHR: u8 = 122;
pub const IUSHR: u8 = 124;
pub const LUSHR: u8 = 125;
pub const IAND: u8 = 126;
pub const LAND: u8 = 127;
pub const IOR: u8 = 128;
pub const IXOR: u8 = 130;
pub const LXOR: u8 = 131;
pub const IINC: u8 = 132;
pub const I2L: u8 = 133;
pub const I2F: u8 = 134;
pub const I2D: u8 = 135;
pub const L2I: u8 = 136;
pub const L2F: u8 = 137;
pub const L2D: u8 = 138;
pub const F2I: u8 = 139;
pub const F2L: u8 = 140;
pub const F2D: u8 = 141;
pub const D2I: u8 = 142;
pub const D2L: u8 = 143;
pub const D2F: u8 = 144;
pub const I2B: u8 = 145;
pub const I2C: u8 = 146;
pub const I2S: u8 = 147;
pub const LCMP: u8 = 148;
pub const FCMPL: u8 = 149;
pub const FCMPG: u8 = 150;
pub const DCMPL: u8 = 151;
pub const DCMPG: u8 = 152;
pub const IFEQ: u8 = 153;
pub const IFNE: u8 = 154;
pub const IFLT: u8 = 155;
pub const IFGE: u8 = 156;
pub const IFGT: u8 = 157;
pub const IFLE: u8 = 158;
pub const IF_ICMPEQ: u8 = 159;
pub const IF_ICMPNE: u8 = 160;
pub const IF_ICMPLT: u8 = 161;
pub const IF_ICMPGE: u8 = 162;
pub const IF_ICMPGT: u8 = 163;
pub const IF_ICMPLE: u8 = 164;
pub const IF_ACMPEQ: u8 = 165;
pub const IF_ACMPNE: u8 = 166;
pub const GOTO: u8 = 167;
pub const JSR: u8 = 168;
pub const RET: u8 = 169;
pub const TABLESWITCH: u8 = 170;
pub const LOOKUPSWITCH: u8 = 171;
pub const IRETURN: u8 = 172;
pub const LRETURN: u8 = 173;
pub const FRETURN: u8 = 174;
pub const DRETURN: u8 = 175;
pub const ARETURN: u8 = 176;
pub const RETURN: u8 = 177;
pub const GETSTATIC: u8 = 178;
pub const PUTSTATIC: u8 = 179;
pub const GETFIELD: u8 = 180;
pub const PUTFIELD: u8 = 181;
pub const INVOKEVIRTUAL: u8 = 182;
pub const INVOKESPECIAL: u8 = 183;
pub const INVOKESTATIC: u8 = 184;
pub const INVOKEINTERFACE: u8 = 185;
pub const INVOKEDYNAMIC: u8 = 186;
pub const NEW: u8 = 187;
pub const NEWARRAY: u8 = 188;
pub const ANEWARRAY: u8 = 189;
pub const ARRAYLENGTH: u8 = 190;
pub const ATHROW: u8 = 191;
pub const CHECKCAST: u8 = 192;
pub const INSTANCEOF: u8 = 193;
pub const MONITORENTER: u8 = 194;
pub const MONITOREXIT: u8 = 195;
pub const WIDE: u8 = 196;
pub const MULTIANEWARRAY: u8 = 197;
pub const IFNULL: u8 = 198;
pub const IFNONNULL: u8 = 199;
pub const GOTO_W: u8 = 200;
pub const JSR_W: u8 = 201;

/// Primitive element kind of a local load/store opcode, short forms included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Int,
    Long,
    Float,
    Double,
    Ref,
}

impl Kind {
    pub fn slots(self) -> usize {
        match self {
            Kind::Long | Kind::Double => 2,
            _ => 1,
        }
    }

    fn offset(self) -> u8 {
        match self {
            Kind::Int => 0,
            Kind::Long => 1,
            Kind::Float => 2,
            Kind::Double => 3,
            Kind::Ref => 4,
        }
    }

    fn from_offset(o: u8) -> Kind {
        [Kind::Int, Kind::Long, Kind::Float, Kind::Double, Kind::Ref][o as usize]
    }

    pub fn load_op(self) -> u8 {
        ILOAD + self.offset()
    }

    pub fn store_op(self) -> u8 {
        ISTORE + self.offset()
    }

    pub fn return_op(self) -> u8 {
        IRETURN + self.offset()
    }
}

/// `(kind, Some(index))` for short forms like `iload_2`, `(kind, None)` for the indexed form.
pub fn load_kind(op: u8) -> Option<(Kind, Option<u16>)> {
    match op {
        ILOAD..=ALOAD => Some((Kind::from_offset(op - ILOAD), None)),
        ILOAD_0..=ALOAD_3 => {
            let k = op - ILOAD_0;
            Some((Kind::from_offset(k / 4), Some((k % 4) as u16)))
        }
        _ => None,
    }
}

pub fn store_kind(op: u8) -> Option<(Kind, Option<u16>)> {
    match op {
        ISTORE..=ASTORE => Some((Kind::from_offset(op - ISTORE), None)),
        ISTORE_0..=ASTORE_3 => {
            let k = op - ISTORE_0;
            Some((Kind::from_offset(k / 4), Some((k % 4) as u16)))
        }
        _ => None,
    }
}

pub fn return_kind(op: u8) -> Option<Option<Kind>> {
    match op {
        IRETURN..=ARETURN => Some(Some(Kind::from_offset(op - IRETURN))),
        RETURN => Some(None),
        _ => None,
    }
}

pub fn is_conditional_branch(op: u8) -> bool {
    matches!(op, IFEQ..=IF_ACMPNE | IFNULL | IFNONNULL)
}

pub fn is_unconditional(op: u8) -> bool {
    matches!(op, GOTO | GOTO_W | TABLESWITCH | LOOKUPSWITCH | IRETURN..=RETURN | ATHROW | RET)
}

/// The conditional branch with the opposite outcome.
pub fn invert_branch(op: u8) -> Option<u8> {
    Some(match op {
        IFEQ..=IF_ACMPNE => {
            let rel = op - IFEQ;
            IFEQ + (rel ^ 1)
        }
        IFNULL => IFNONNULL,
        IFNONNULL => IFNULL,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shape() {
        assert_eq!(defined_count(), 202);
        assert_eq!(name(0xC4), "wide");
        assert_eq!(by_name("goto_w"), Some(GOTO_W));
        assert!(info(0xCA).is_none());
    }

    #[test]
    fn branch_inversion_is_involution() {
        for op in (IFEQ..=IF_ACMPNE).chain([IFNULL, IFNONNULL]) {
            let inv = invert_branch(op).unwrap();
            assert_ne!(inv, op);
            assert_eq!(invert_branch(inv), Some(op));
        }
        assert_eq!(invert_branch(IFLT), Some(IFGE));
        assert_eq!(invert_branch(IF_ICMPGT), Some(IF_ICMPLE));
    }

    #[test]
    fn short_forms() {
        assert_eq!(load_kind(ALOAD_3), Some((Kind::Ref, Some(3))));
        assert_eq!(load_kind(30), Some((Kind::Long, Some(0))));
        assert_eq!(store_kind(ASTORE_3), Some((Kind::Ref, Some(3))));
        assert_eq!(store_kind(LSTORE), Some((Kind::Long, None)));
    }
}
