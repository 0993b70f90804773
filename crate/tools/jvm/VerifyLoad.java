import java.io.*;
import java.util.*;

/**
 * Loads class files under the JVM verifier, one fresh loader per request.
 * Usage: VerifyLoad <base-dir>; stdin lines are "<class-file> <binary-name>".
 * Prints "OK" or "REJECT <error>" per line. Dependencies resolve from base-dir.
 */
public class VerifyLoad {
    static class Loader extends ClassLoader {
        final File base;
        final String target;
        final byte[] bytes;

        Loader(File base, String target, byte[] bytes) {
            super(VerifyLoad.class.getClassLoader());
            this.base = base;
            this.target = target;
            this.bytes = bytes;
        }

        protected Class<?> loadClass(String name, boolean resolve) throws ClassNotFoundException {
            synchronized (getClassLoadingLock(name)) {
                Class<?> c = findLoadedClass(name);
                if (c != null) return c;
                if (name.equals(target)) return defineClass(name, bytes, 0, bytes.length);
                File f = new File(base, name.replace('.', '/') + ".class");
                if (f.isFile()) {
                    try {
                        byte[] b = AsmDump.readAll(f);
                        return defineClass(name, b, 0, b.length);
                    } catch (IOException e) {
                        throw new ClassNotFoundException(name, e);
                    }
                }
                return super.loadClass(name, resolve);
            }
        }
    }

    public static void main(String[] args) throws Exception {
        File base = new File(args[0]);
        BufferedReader in = new BufferedReader(new InputStreamReader(System.in));
        String line;
        while ((line = in.readLine()) != null) {
            line = line.trim();
            if (line.isEmpty()) continue;
            int sp = line.lastIndexOf(' ');
            String path = line.substring(0, sp), name = line.substring(sp + 1);
            String verdict;
            try {
                byte[] b = AsmDump.readAll(new File(path));
                Class<?> c = new Loader(base, name, b).loadClass(name);
                // reflection links the class, which runs the verifier; static initializers do not run
                c.getDeclaredMethods();
                verdict = "OK";
            } catch (VerifyError e) {
                verdict = "REJECT " + oneLine(e);
            } catch (ClassFormatError e) {
                verdict = "REJECT " + oneLine(e);
            } catch (Throwable e) {
                verdict = "REJECT " + oneLine(e);
            }
            System.out.println(verdict);
            System.out.flush();
        }
    }

    static String oneLine(Throwable t) {
        return (t.getClass().getName() + ": " + t.getMessage()).replace('\n', ' ');
    }
}
