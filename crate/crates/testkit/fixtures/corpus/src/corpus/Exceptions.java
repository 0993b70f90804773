package corpus;

public class Exceptions {
    public static int parse(String s) {
        try {
            return Integer.parseInt(s);
        } catch (NumberFormatException e) {
            return -1;
        }
    }

    public static String cast(Object o) {
        try {
            return (String) o;
        } catch (ClassCastException e) {
            return "not a string";
        } finally {
            Counter.bump();
        }
    }

    public static int multi(int[] a, int i) {
        int r = 0;
        try {
            r = a[i] / (i - 1);
        } catch (ArithmeticException e) {
            r = -2;
        } catch (ArrayIndexOutOfBoundsException e) {
            r = -3;
        } catch (RuntimeException e) {
            r = -4;
        }
        return r;
    }

    public static void rethrow(String s) throws Failure {
        try {
            if (s == null) {
                throw new IllegalArgumentException("null");
            }
        } catch (IllegalArgumentException e) {
            throw new Failure(e.getMessage());
        }
    }

    static class Failure extends Exception {
        Failure(String m) {
            super(m);
        }
    }

    static class Counter {
        static int n;

        static void bump() {
            n++;
        }
    }

    static class Guarded {
        private final Object lock = new Object();
        private int value;

        int incrementAndGet() {
            synchronized (lock) {
                value++;
                return value;
            }
        }
    }
}
