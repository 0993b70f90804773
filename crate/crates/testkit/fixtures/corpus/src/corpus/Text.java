package corpus;

public class Text {
    static int wordCount(String s) {
        int n = 0;
        boolean inWord = false;
        for (int i = 0; i < s.length(); i++) {
            boolean ws = Character.isWhitespace(s.charAt(i));
            if (!ws && !inWord) n++;
            inWord = !ws;
        }
        return n;
    }

    static String capitalize(String s) {
        if (s == null || s.isEmpty()) return s;
        return Character.toUpperCase(s.charAt(0)) + s.substring(1);
    }

    static String[] split(String s, char sep) {
        int parts = 1;
        for (int i = 0; i < s.length(); i++) if (s.charAt(i) == sep) parts++;
        String[] out = new String[parts];
        int start = 0, k = 0;
        for (int i = 0; i <= s.length(); i++) {
            if (i == s.length() || s.charAt(i) == sep) {
                out[k++] = s.substring(start, i);
                start = i + 1;
            }
        }
        return out;
    }

    static class Template {
        private final String pattern;

        Template(String p) {
            pattern = p;
        }

        String render(String name, int count) {
            return pattern.replace("{name}", name).replace("{count}", String.valueOf(count));
        }
    }

    static class Wrapper {
        static String wrap(String s, int width) {
            StringBuilder sb = new StringBuilder();
            int col = 0;
            String[] words = split(s, ' ');
            for (int i = 0; i < words.length; i++) {
                if (col + words[i].length() > width && col > 0) {
                    sb.append('\n');
                    col = 0;
                } else if (col > 0) {
                    sb.append(' ');
                    col++;
                }
                sb.append(words[i]);
                col += words[i].length();
            }
            return sb.toString();
        }
    }
}
