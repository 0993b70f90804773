package corpus;

public class Json {
    static abstract class Value {
        abstract void write(StringBuilder sb);
    }

    static class Str extends Value {
        final String s;

        Str(String s) {
            this.s = s;
        }

        void write(StringBuilder sb) {
            sb.append('"');
            for (int i = 0; i < s.length(); i++) {
                char c = s.charAt(i);
                if (c == '"' || c == '\\') sb.append('\\');
                sb.append(c);
            }
            sb.append('"');
        }
    }

    static class Num extends Value {
        final long n;

        Num(long n) {
            this.n = n;
        }

        void write(StringBuilder sb) {
            sb.append(n);
        }
    }

    static class Bool extends Value {
        final boolean b;

        Bool(boolean b) {
            this.b = b;
        }

        void write(StringBuilder sb) {
            sb.append(b ? "true" : "false");
        }
    }

    static class Arr extends Value {
        final Value[] items;

        Arr(Value[] items) {
            this.items = items;
        }

        void write(StringBuilder sb) {
            sb.append('[');
            for (int i = 0; i < items.length; i++) {
                if (i > 0) sb.append(',');
                if (items[i] == null) sb.append("null");
                else items[i].write(sb);
            }
            sb.append(']');
        }
    }

    static String encode(Value v) {
        StringBuilder sb = new StringBuilder();
        v.write(sb);
        return sb.toString();
    }
}
