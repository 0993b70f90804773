package corpus;

public class Tokenizer {
    public static final int NUMBER = 1, IDENT = 2, OP = 3, EOF = 4;

    private final String src;
    private int pos;
    String text;

    Tokenizer(String src) {
        this.src = src;
    }

    int next() {
        while (pos < src.length() && Character.isWhitespace(src.charAt(pos))) pos++;
        if (pos >= src.length()) {
            text = "";
            return EOF;
        }
        int start = pos;
        char c = src.charAt(pos);
        if (Character.isDigit(c)) {
            while (pos < src.length() && Character.isDigit(src.charAt(pos))) pos++;
            text = src.substring(start, pos);
            return NUMBER;
        }
        if (Character.isLetter(c)) {
            while (pos < src.length() && Character.isLetterOrDigit(src.charAt(pos))) pos++;
            text = src.substring(start, pos);
            return IDENT;
        }
        pos++;
        text = String.valueOf(c);
        return OP;
    }

    static class Calc {
        private final Tokenizer t;
        private int tok;

        Calc(String s) {
            t = new Tokenizer(s);
            tok = t.next();
        }

        int expr() {
            int v = term();
            while (tok == OP && (t.text.equals("+") || t.text.equals("-"))) {
                boolean plus = t.text.equals("+");
                tok = t.next();
                int r = term();
                v = plus ? v + r : v - r;
            }
            return v;
        }

        int term() {
            int v = atom();
            while (tok == OP && (t.text.equals("*") || t.text.equals("/"))) {
                boolean mul = t.text.equals("*");
                tok = t.next();
                int r = atom();
                v = mul ? v * r : v / r;
            }
            return v;
        }

        int atom() {
            if (tok == NUMBER) {
                int v = Integer.parseInt(t.text);
                tok = t.next();
                return v;
            }
            if (tok == OP && t.text.equals("(")) {
                tok = t.next();
                int v = expr();
                tok = t.next();
                return v;
            }
            throw new IllegalArgumentException("unexpected " + t.text);
        }
    }
}
