package corpus;

public class Statics {
    static final int LIMIT = 1000;
    static int[] table;
    static String greeting = "hello";
    static long counter;

    static {
        table = new int[16];
        for (int i = 0; i < table.length; i++) {
            table[i] = i * i;
        }
    }

    public static int lookup(int i) {
        if (i < 0 || i >= table.length) {
            return -1;
        }
        return table[i];
    }

    public static synchronized long next() {
        counter++;
        if (counter > LIMIT) {
            counter = 0;
        }
        return counter;
    }

    public static String greet(String name) {
        return greeting + ", " + name;
    }

    static class Registry {
        static Registry instance;
        private final String[] names = new String[8];
        private int size;

        static Registry get() {
            if (instance == null) {
                instance = new Registry();
            }
            return instance;
        }

        boolean register(String n) {
            if (size == names.length) {
                return false;
            }
            names[size++] = n;
            return true;
        }
    }
}
