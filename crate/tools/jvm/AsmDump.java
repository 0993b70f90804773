import java.io.*;
import org.apache.xbean.asm9.*;

/**
 * Independent class-file oracle built on ASM. For every class file argument it prints the
 * class header, fields, and per method: max stack/locals, the opcode sequence, line-number
 * starts with their bytecode offsets, ldc constants, and local-variable table entries.
 */
public class AsmDump {
    public static void main(String[] args) throws Exception {
        for (int a = 0; a < args.length; a++) {
            byte[] bytes = readAll(new File(args[a]));
            new OffsetReader(bytes).accept(new ClassVisitor(Opcodes.ASM9) {
                public void visit(int version, int access, String name, String sig, String sup, String[] itfs) {
                    System.out.println("class " + name + " super " + sup + " version " + (version & 0xFFFF) + "." + (version >>> 16) + " access " + access);
                }
                public FieldVisitor visitField(int access, String name, String desc, String sig, Object value) {
                    System.out.println("field " + name + " " + desc + " " + access);
                    return null;
                }
                public MethodVisitor visitMethod(int access, String name, String desc, String sig, String[] exc) {
                    System.out.println("method " + name + desc + " access " + access);
                    return new MethodVisitor(Opcodes.ASM9) {
                        public void visitInsn(int op) { System.out.println("  op " + op); }
                        public void visitIntInsn(int op, int v) { System.out.println("  op " + op + " int " + v); }
                        public void visitVarInsn(int op, int v) { System.out.println("  op " + op + " var " + v); }
                        public void visitTypeInsn(int op, String t) { System.out.println("  op " + op + " type " + t); }
                        public void visitFieldInsn(int op, String o, String n, String d) { System.out.println("  op " + op + " field " + o + "." + n + ":" + d); }
                        public void visitMethodInsn(int op, String o, String n, String d, boolean itf) { System.out.println("  op " + op + " method " + o + "." + n + d); }
                        public void visitJumpInsn(int op, Label l) { System.out.println("  op " + op + " jump @" + l.hashCode()); }
                        public void visitLabel(Label l) { System.out.println("  label @" + l.hashCode()); }
                        public void visitLdcInsn(Object c) { System.out.println("  op 18 ldc " + c.getClass().getName() + " " + c); }
                        public void visitIincInsn(int v, int inc) { System.out.println("  op 132 iinc " + v + " " + inc); }
                        public void visitTableSwitchInsn(int lo, int hi, Label d, Label[] ls) { System.out.println("  op 170 tableswitch " + lo + " " + hi); }
                        public void visitLookupSwitchInsn(Label d, int[] keys, Label[] ls) { System.out.println("  op 171 lookupswitch " + keys.length); }
                        public void visitMultiANewArrayInsn(String d, int dims) { System.out.println("  op 197 multianewarray " + d + " " + dims); }
                        public void visitTryCatchBlock(Label s, Label e, Label h, String t) { System.out.println("  try @" + s.hashCode() + " @" + e.hashCode() + " @" + h.hashCode() + " " + t); }
                        public void visitLocalVariable(String n, String d, String sig, Label s, Label e, int idx) { System.out.println("  local " + idx + " " + n + " " + d + " @" + s.hashCode() + " @" + e.hashCode()); }
                        public void visitLineNumber(int line, Label s) { System.out.println("  line " + line + " @" + s.hashCode()); }
                        public void visitMaxs(int ms, int ml) { System.out.println("  maxs " + ms + " " + ml); }
                    };
                }
            }, 0);
        }
    }

    /** Label that remembers the offset it was created for. */
    static class OffsetLabel extends Label {
        final int offset;
        OffsetLabel(int offset) { this.offset = offset; }
        public int hashCode() { return offset; }
    }

    static class OffsetReader extends ClassReader {
        OffsetReader(byte[] b) { super(b); }
        protected Label readLabel(int off, Label[] labels) {
            if (labels[off] == null) labels[off] = new OffsetLabel(off);
            return labels[off];
        }
    }

    static byte[] readAll(File f) throws IOException {
        InputStream in = new FileInputStream(f);
        ByteArrayOutputStream out = new ByteArrayOutputStream();
        byte[] buf = new byte[8192];
        int n;
        while ((n = in.read(buf)) > 0) out.write(buf, 0, n);
        in.close();
        return out.toByteArray();
    }
}
