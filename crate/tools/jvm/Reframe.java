import java.io.*;
import java.net.*;
import org.apache.xbean.asm9.*;

/**
 * Rewrites class files at version 52 with frames recomputed by ASM.
 * Usage: Reframe <in-dir> <out-dir>
 */
public class Reframe {
    public static void main(String[] args) throws Exception {
        final File in = new File(args[0]);
        File out = new File(args[1]);
        final ClassLoader loader = new URLClassLoader(new URL[] { in.toURI().toURL() }, Reframe.class.getClassLoader());
        int n = 0;
        for (String rel : list(in, "")) {
            byte[] bytes = AsmDump.readAll(new File(in, rel));
            ClassReader cr = new ClassReader(bytes);
            ClassWriter cw = new ClassWriter(ClassWriter.COMPUTE_FRAMES) {
                protected ClassLoader getClassLoader() {
                    return loader;
                }
            };
            cr.accept(new ClassVisitor(Opcodes.ASM9, cw) {
                public void visit(int version, int access, String name, String sig, String sup, String[] itfs) {
                    super.visit(Opcodes.V1_8, access, name, sig, sup, itfs);
                }
            }, ClassReader.SKIP_FRAMES);
            File dst = new File(out, rel);
            dst.getParentFile().mkdirs();
            FileOutputStream fo = new FileOutputStream(dst);
            fo.write(cw.toByteArray());
            fo.close();
            n++;
        }
        System.out.println("reframed " + n);
    }

    static java.util.List<String> list(File dir, String prefix) {
        java.util.List<String> out = new java.util.ArrayList<String>();
        File[] fs = dir.listFiles();
        java.util.Arrays.sort(fs);
        for (File f : fs) {
            if (f.isDirectory()) out.addAll(list(f, prefix + f.getName() + "/"));
            else if (f.getName().endsWith(".class")) out.add(prefix + f.getName());
        }
        return out;
    }
}
