package app;

public class Names {
    public static String pick(String a, String b) {
        String r = "";
        if (b != null) {
            r = a.trim();
        }
        return r;
    }
}
