package corpus;

public class Strings {
    public static String reverse(String s) {
        char[] cs = s.toCharArray();
        for (int i = 0, j = cs.length - 1; i < j; i++, j--) {
            char t = cs[i];
            cs[i] = cs[j];
            cs[j] = t;
        }
        return new String(cs);
    }

    public static boolean isPalindrome(String s) {
        int i = 0, j = s.length() - 1;
        while (i < j) {
            if (s.charAt(i) != s.charAt(j)) {
                return false;
            }
            i++;
            j--;
        }
        return true;
    }

    public static int countVowels(String s) {
        int n = 0;
        for (int i = 0; i < s.length(); i++) {
            char c = Character.toLowerCase(s.charAt(i));
            if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') {
                n++;
            }
        }
        return n;
    }

    public static String join(String[] parts, String sep) {
        StringBuilder sb = new StringBuilder();
        for (int i = 0; i < parts.length; i++) {
            if (i > 0) {
                sb.append(sep);
            }
            sb.append(parts[i]);
        }
        return sb.toString();
    }

    static class Escaper {
        String escape(String s) {
            StringBuilder sb = new StringBuilder();
            for (int i = 0; i < s.length(); i++) {
                char c = s.charAt(i);
                if (c == '<') sb.append("&lt;");
                else if (c == '>') sb.append("&gt;");
                else if (c == '&') sb.append("&amp;");
                else sb.append(c);
            }
            return sb.toString();
        }
    }

    static class Padder {
        final char fill;

        Padder(char fill) {
            this.fill = fill;
        }

        String left(String s, int width) {
            StringBuilder sb = new StringBuilder();
            for (int i = s.length(); i < width; i++) {
                sb.append(fill);
            }
            return sb.append(s).toString();
        }
    }
}
